#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flowgate::cli {

// Stable exit codes for scripting.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

struct CommonArgs {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

struct IngestArgs {
    CommonArgs common;
    std::vector<std::string> inputs;
    std::optional<std::string> schema;
};

struct BalanceArgs {
    CommonArgs common;
    std::string input;
    std::optional<std::string> schema;
    bool clamp_k = false;
};

struct TrainArgs {
    CommonArgs common;
    std::optional<std::string> input;
};

struct EvaluateArgs {
    CommonArgs common;
    std::string bundle;
    std::string test;
    std::optional<std::string> original;
    std::optional<std::string> unit;
};

struct SynthArgs {
    CommonArgs common;
    std::string name = "synth.csv";
};

// Each returns a process exit code and reports failures on stderr.
int cmd_ingest(const IngestArgs& args);
int cmd_balance(const BalanceArgs& args);
int cmd_train(const TrainArgs& args);
int cmd_evaluate(const EvaluateArgs& args);
int cmd_synth(const SynthArgs& args);

// Parses argv and dispatches; the flowgate binary is a thin wrapper around this.
int run(int argc, char** argv);

} // namespace flowgate::cli
