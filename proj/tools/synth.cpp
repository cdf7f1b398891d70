#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "flowgate/error.hpp"
#include "flowgate/rng.hpp"

namespace flowgate::cli {

std::map<std::string, std::size_t> synth_counts(const SynthSpec& spec) {
    if (spec.classes.empty()) throw Error(Errc::invalid_config, "synth spec has no classes");
    std::set<std::string> names;
    std::size_t absolute = 0;
    double proportion_sum = 0.0;
    std::vector<const SynthClass*> proportional;
    for (const auto& c : spec.classes) {
        if (!names.insert(c.name).second) throw Error(Errc::invalid_config, "duplicate class '" + c.name + "'");
        if (c.count) {
            if (*c.count == 0) throw Error(Errc::invalid_config, "class '" + c.name + "' has count 0");
            absolute += *c.count;
        } else if (c.proportion) {
            if (!(*c.proportion > 0.0)) throw Error(Errc::invalid_config, "class '" + c.name + "' proportion must be > 0");
            proportion_sum += *c.proportion;
            proportional.push_back(&c);
        } else {
            throw Error(Errc::invalid_config, "class '" + c.name + "' needs a proportion or a count");
        }
    }

    std::map<std::string, std::size_t> counts;
    for (const auto& c : spec.classes) {
        if (c.count) counts[c.name] = *c.count;
    }
    if (proportional.empty()) return counts;
    if (std::abs(proportion_sum - 1.0) > 1e-9) {
        throw Error(Errc::invalid_config, "proportions sum to " + std::to_string(proportion_sum) + ", expected 1");
    }
    if (absolute > spec.total) throw Error(Errc::invalid_config, "absolute counts exceed total");
    const std::size_t pool = spec.total - absolute;

    std::vector<std::size_t> share(proportional.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < proportional.size(); ++i) {
        const double exact = *proportional[i]->proportion * static_cast<double>(pool);
        share[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        assigned += share[i];
        remainders.emplace_back(-(exact - static_cast<double>(share[i])), i);
    }
    std::sort(remainders.begin(), remainders.end());
    for (std::size_t r = 0; assigned < pool && r < remainders.size(); ++r, ++assigned) ++share[remainders[r].second];
    for (std::size_t i = 0; i < proportional.size(); ++i) {
        if (share[i] == 0) {
            throw Error(Errc::invalid_config, "class '" + proportional[i]->name + "' rounds to 0 records");
        }
        counts[proportional[i]->name] = share[i];
    }
    return counts;
}

namespace {

using Centers = std::vector<std::vector<double>>;

const Centers& resolve_centers(const SynthSpec& spec, std::size_t idx, std::map<std::size_t, Centers>& memo,
                               std::size_t depth) {
    if (auto it = memo.find(idx); it != memo.end()) return it->second;
    if (depth > spec.classes.size()) throw Error(Errc::invalid_config, "overlap_with forms a cycle");
    const auto& c = spec.classes[idx];
    Rng rng(derive_seed(spec.seed, 2 * idx + 1));
    Centers centers;
    if (c.overlap_with) {
        auto host = std::find_if(spec.classes.begin(), spec.classes.end(),
                                 [&](const SynthClass& o) { return o.name == *c.overlap_with; });
        if (host == spec.classes.end()) {
            throw Error(Errc::invalid_config, "class '" + c.name + "' overlaps unknown class '" + *c.overlap_with + "'");
        }
        const auto host_idx = static_cast<std::size_t>(host - spec.classes.begin());
        const Centers host_centers = resolve_centers(spec, host_idx, memo, depth + 1);
        const double spread = c.overlap_spread * host->scale;
        if (c.centers.empty()) {
            for (const auto& hc : host_centers) {
                std::vector<double> center(hc);
                for (auto& v : center) v += spread * rng.normal();
                centers.push_back(std::move(center));
            }
        } else {
            centers = c.centers;
        }
    } else if (!c.centers.empty()) {
        centers = c.centers;
    } else {
        std::vector<double> center(spec.feature_width);
        for (auto& v : center) v = rng.uniform(-spec.center_range, spec.center_range);
        centers.push_back(std::move(center));
    }
    for (const auto& center : centers) {
        if (center.size() != spec.feature_width) {
            throw Error(Errc::invalid_config, "class '" + c.name + "' centre width differs from feature_width");
        }
    }
    return memo.emplace(idx, std::move(centers)).first->second;
}

} // namespace

FlowDataset synthesize(const SynthSpec& spec) {
    if (spec.feature_width == 0) throw Error(Errc::invalid_config, "feature_width must be >= 1");
    const auto counts = synth_counts(spec);
    std::vector<std::string> names;
    for (std::size_t f = 0; f < spec.feature_width; ++f) names.push_back("f" + std::to_string(f));
    FlowDataset staged(names);

    std::map<std::size_t, Centers> memo;
    std::vector<double> row(spec.feature_width);
    for (std::size_t idx = 0; idx < spec.classes.size(); ++idx) {
        const auto& c = spec.classes[idx];
        const auto& centers = resolve_centers(spec, idx, memo, 0);
        Rng rng(derive_seed(spec.seed, 2 * idx + 2));
        for (std::size_t n = 0; n < counts.at(c.name); ++n) {
            const auto& center = centers[static_cast<std::size_t>(rng.below(centers.size()))];
            for (std::size_t f = 0; f < spec.feature_width; ++f) row[f] = center[f] + c.scale * rng.normal();
            staged.append(row, c.name);
        }
    }
    std::vector<std::size_t> order(staged.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(spec.seed, 0));
    shuffle_rng.shuffle(std::span(order));
    return staged.subset(order);
}

void from_json(const nlohmann::json& j, SynthClass& c) {
    c = SynthClass{};
    j.at("name").get_to(c.name);
    if (j.contains("proportion")) c.proportion = j.at("proportion").get<double>();
    if (j.contains("count")) c.count = j.at("count").get<std::size_t>();
    if (j.contains("centers")) j.at("centers").get_to(c.centers);
    if (j.contains("scale")) j.at("scale").get_to(c.scale);
    if (j.contains("overlap_with")) c.overlap_with = j.at("overlap_with").get<std::string>();
    if (j.contains("overlap_spread")) j.at("overlap_spread").get_to(c.overlap_spread);
}

void to_json(nlohmann::json& j, const SynthClass& c) {
    j = nlohmann::json{{"name", c.name}, {"scale", c.scale}, {"overlap_spread", c.overlap_spread}};
    if (c.proportion) j["proportion"] = *c.proportion;
    if (c.count) j["count"] = *c.count;
    if (!c.centers.empty()) j["centers"] = c.centers;
    if (c.overlap_with) j["overlap_with"] = *c.overlap_with;
}

void from_json(const nlohmann::json& j, SynthSpec& s) {
    s = SynthSpec{};
    j.at("classes").get_to(s.classes);
    if (j.contains("total")) j.at("total").get_to(s.total);
    if (j.contains("feature_width")) j.at("feature_width").get_to(s.feature_width);
    if (j.contains("seed")) j.at("seed").get_to(s.seed);
    if (j.contains("center_range")) j.at("center_range").get_to(s.center_range);
}

void to_json(nlohmann::json& j, const SynthSpec& s) {
    j = nlohmann::json{{"classes", s.classes},
                       {"total", s.total},
                       {"feature_width", s.feature_width},
                       {"seed", s.seed},
                       {"center_range", s.center_range}};
}

} // namespace flowgate::cli
