#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgate/dataset.hpp"

namespace flowgate::cli {

struct SynthClass {
    std::string name;
    std::optional<double> proportion;
    std::optional<std::size_t> count;     // overrides proportion
    std::vector<std::vector<double>> centers;
    double scale = 1.0;
    // Draw this class's centres inside another class's cloud.
    std::optional<std::string> overlap_with;
    double overlap_spread = 0.5;         // centre offset, in units of the host's scale
};

struct SynthSpec {
    std::vector<SynthClass> classes;
    std::size_t total = 0;
    std::size_t feature_width = 4;
    std::uint64_t seed = 0;
    double center_range = 10.0;
};

// Absolute counts are honoured exactly; proportional classes share what is
// left of `total` by largest remainder. Throws InvalidConfig when proportions
// do not sum to 1 or a class would end up empty.
std::map<std::string, std::size_t> synth_counts(const SynthSpec& spec);

// Gaussian clusters, rows shuffled, feature columns f0..f{w-1}.
FlowDataset synthesize(const SynthSpec& spec);

void from_json(const nlohmann::json& j, SynthClass& c);
void to_json(nlohmann::json& j, const SynthClass& c);
void from_json(const nlohmann::json& j, SynthSpec& s);
void to_json(nlohmann::json& j, const SynthSpec& s);

} // namespace flowgate::cli
