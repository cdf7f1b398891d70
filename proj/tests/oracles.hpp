#pragma once

// Independent reference implementations used to cross-check the library.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <sys/wait.h>

#include "flowgate/dataset.hpp"
#include "flowgate/error.hpp"
#include "flowgate/matrix.hpp"
#include "flowgate/rng.hpp"

namespace oracle {

// All-pairs distances, sorted by (distance, index).
inline std::vector<std::vector<std::size_t>> brute_knn(const flowgate::Matrix& pts, std::size_t k) {
    const auto n = static_cast<std::size_t>(pts.rows());
    std::vector<std::vector<std::size_t>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> d;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double s = 0;
            for (Eigen::Index c = 0; c < pts.cols(); ++c) {
                const double diff = pts(static_cast<Eigen::Index>(i), c) - pts(static_cast<Eigen::Index>(j), c);
                s += diff * diff;
            }
            d.emplace_back(s, j);
        }
        std::sort(d.begin(), d.end());
        for (std::size_t m = 0; m < k; ++m) out[i].push_back(d[m].second);
    }
    return out;
}

struct Counts {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// One-vs-rest recount straight from label pairs.
inline Counts recount(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred, std::size_t c) {
    Counts k;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool t = truth[i] == c;
        const bool p = pred[i] == c;
        if (t && p) ++k.tp;
        else if (!t && p) ++k.fp;
        else if (t && !p) ++k.fn;
        else ++k.tn;
    }
    return k;
}

inline double safe_ratio(double num, double den) { return den == 0 ? 0.0 : num / den; }

// Is s on the segment [x, y]? Returns the residual of the 2-D cross product
// (generalized: distance of s from the line) and the interpolation factor.
inline std::pair<double, double> segment_fit(std::span<const double> s, std::span<const double> x,
                                             std::span<const double> y) {
    double dd = 0, ds = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        dd += (y[j] - x[j]) * (y[j] - x[j]);
        ds += (s[j] - x[j]) * (y[j] - x[j]);
    }
    const double u = dd == 0 ? 0.0 : ds / dd;
    double residual = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        residual = std::max(residual, std::abs(x[j] + u * (y[j] - x[j]) - s[j]));
    }
    return {residual, u};
}

inline flowgate::FlowDataset blobs(const std::vector<std::pair<std::string, std::size_t>>& classes,
                                   std::size_t width, double spacing, double spread, std::uint64_t seed) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < width; ++j) names.push_back("f" + std::to_string(j));
    flowgate::FlowDataset d(names);
    flowgate::Rng rng(seed);
    std::vector<double> row(width);
    for (std::size_t c = 0; c < classes.size(); ++c) {
        for (std::size_t i = 0; i < classes[c].second; ++i) {
            for (std::size_t j = 0; j < width; ++j) {
                const double center = (j == c % width ? spacing * static_cast<double>(1 + c / width) : 0.0);
                row[j] = center + spread * rng.normal();
            }
            d.append(row, classes[c].first);
        }
    }
    return d;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    const std::filesystem::path p = std::filesystem::path(FLOWGATE_TEST_TMP) / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Runs the CLI; returns its exit status.
inline int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + std::string(FLOWGATE_BIN) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace oracle

#define CHECK_ERRC(expr, errc)                                      \
    do {                                                            \
        bool thrown_ = false;                                       \
        try {                                                       \
            (void)(expr);                                           \
        } catch (const flowgate::Error& e_) {                       \
            thrown_ = true;                                         \
            CHECK_MESSAGE(e_.code() == (errc), e_.what());          \
        }                                                           \
        CHECK_MESSAGE(thrown_, "expected " #errc);                  \
    } while (false)
