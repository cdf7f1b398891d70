#include "flowgate/resample.hpp"

#include <algorithm>
#include <iostream>
#include <mutex>
#include <numeric>
#include <set>
#include <utility>

#include "flowgate/error.hpp"
#include "flowgate/threads.hpp"

namespace flowgate {

namespace {

std::mutex warning_mutex;
WarningSink warning_sink = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };

void warn(const std::string& msg) {
    std::lock_guard lock(warning_mutex);
    if (warning_sink) warning_sink(msg);
}

Matrix rows_of(const FlowDataset& d, std::span<const std::size_t> idx) {
    Matrix m(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(d.width()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto src = d.row(idx[r]);
        std::copy(src.begin(), src.end(), m.row(static_cast<Eigen::Index>(r)).data());
    }
    return m;
}

void append_rows(FlowDataset& out, const Matrix& m, std::size_t from, const std::string& label) {
    for (Eigen::Index r = static_cast<Eigen::Index>(from); r < m.rows(); ++r) {
        out.append(std::span<const double>(m.row(r).data(), static_cast<std::size_t>(m.cols())), label);
    }
}

} // namespace

void set_warning_sink(WarningSink sink) {
    std::lock_guard lock(warning_mutex);
    warning_sink = std::move(sink);
}

std::vector<std::vector<std::size_t>> knn_indices(const Matrix& points, std::size_t k) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (k == 0) throw Error(Errc::invalid_plan, "k must be positive");
    if (k >= n) {
        throw Error(Errc::k_too_large, "k = " + std::to_string(k) + " needs more than " + std::to_string(n) + " points");
    }
    const auto w = static_cast<std::size_t>(points.cols());
    std::vector<std::vector<std::size_t>> out(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::size_t>> cand;
        cand.reserve(n - 1);
        for (std::size_t i = begin; i < end; ++i) {
            cand.clear();
            const double* xi = points.row(static_cast<Eigen::Index>(i)).data();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double* xj = points.row(static_cast<Eigen::Index>(j)).data();
                double d2 = 0.0;
                for (std::size_t f = 0; f < w; ++f) {
                    const double diff = xi[f] - xj[f];
                    d2 += diff * diff;
                }
                cand.emplace_back(d2, j);
            }
            std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
            auto& nn = out[i];
            nn.reserve(k);
            for (std::size_t m = 0; m < k; ++m) nn.push_back(cand[m].second);
        }
    });
    return out;
}

Matrix smote_oversample(const Matrix& class_points, std::size_t target, std::size_t k, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(class_points.rows());
    if (target < n) {
        throw Error(Errc::target_below_current,
                    "target " + std::to_string(target) + " below current count " + std::to_string(n));
    }
    if (target == n) return class_points;
    if (n < 2) throw Error(Errc::too_few_samples, "SMOTE needs at least 2 records, class has " + std::to_string(n));

    const auto neighbours = knn_indices(class_points, k);
    Matrix out(static_cast<Eigen::Index>(target), class_points.cols());
    out.topRows(static_cast<Eigen::Index>(n)) = class_points;
    Rng rng(seed);
    for (std::size_t s = n; s < target; ++s) {
        const auto base = static_cast<std::size_t>(rng.below(n));
        const auto other = neighbours[base][static_cast<std::size_t>(rng.below(k))];
        const double u = rng.uniform();
        const auto x = class_points.row(static_cast<Eigen::Index>(base));
        const auto y = class_points.row(static_cast<Eigen::Index>(other));
        out.row(static_cast<Eigen::Index>(s)) = x + u * (y - x);
    }
    return out;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t target, Rng& rng) {
    if (target > n) {
        throw Error(Errc::target_above_current,
                    "target " + std::to_string(target) + " above current count " + std::to_string(n));
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < target; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(target);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Matrix random_undersample(const Matrix& class_points, std::size_t target, std::uint64_t seed) {
    Rng rng(seed);
    const auto keep = sample_without_replacement(static_cast<std::size_t>(class_points.rows()), target, rng);
    Matrix out(static_cast<Eigen::Index>(keep.size()), class_points.cols());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = class_points.row(static_cast<Eigen::Index>(keep[r]));
    }
    return out;
}

void validate_plan(const ResamplingPlan& plan, const FlowDataset& d) {
    if (plan.k_neighbors == 0) throw Error(Errc::invalid_plan, "k_neighbors must be positive");
    const auto counts = d.class_counts();
    for (const auto& [name, target] : plan.targets) {
        if (target == 0) throw Error(Errc::invalid_plan, "target for '" + name + "' must be > 0");
        auto it = counts.find(name);
        if (it == counts.end()) throw Error(Errc::invalid_plan, "class '" + name + "' absent from dataset");
        const std::size_t n = it->second;
        if (target > n) {
            if (n < 2) {
                throw Error(Errc::too_few_samples,
                            "class '" + name + "' has " + std::to_string(n) + " record(s); SMOTE needs 2");
            }
            if (!plan.clamp_k && plan.k_neighbors >= n) {
                throw Error(Errc::invalid_plan, "k_neighbors (" + std::to_string(plan.k_neighbors) +
                                                    ") must be below the smallest oversampled class count ('" +
                                                    name + "' has " + std::to_string(n) + ")");
            }
        }
    }
}

FlowDataset balance_to_level(const FlowDataset& d, const ResamplingPlan& plan) {
    validate_plan(plan, d);
    FlowDataset out(d.feature_names());
    std::size_t total = 0;
    const auto groups = d.group_by_label();
    for (const auto& [name, idx] : groups) {
        auto it = plan.targets.find(name);
        total += it == plan.targets.end() ? idx.size() : it->second;
    }
    out.reserve(total);

    std::uint64_t ordinal = 0;
    for (const auto& [name, idx] : groups) {
        const std::uint64_t stream = derive_seed(plan.seed, ordinal++);
        auto it = plan.targets.find(name);
        if (it == plan.targets.end() || it->second == idx.size()) {
            for (auto i : idx) out.append(d.row(i), name);
            continue;
        }
        const std::size_t target = it->second;
        if (target < idx.size()) {
            Rng rng(stream);
            for (auto pick : sample_without_replacement(idx.size(), target, rng)) out.append(d.row(idx[pick]), name);
            continue;
        }
        std::size_t k = plan.k_neighbors;
        if (k >= idx.size()) {
            k = idx.size() - 1;
            warn("class '" + name + "' has " + std::to_string(idx.size()) + " records; clamping k from " +
                 std::to_string(plan.k_neighbors) + " to " + std::to_string(k));
        }
        for (auto i : idx) out.append(d.row(i), name);
        const Matrix grown = smote_oversample(rows_of(d, idx), target, k, stream);
        append_rows(out, grown, idx.size(), name);
    }
    return out;
}

FlowDataset enn_clean(const FlowDataset& d, std::size_t k) {
    if (k == 0) throw Error(Errc::invalid_plan, "k must be positive");
    if (k >= d.size()) {
        throw Error(Errc::k_too_large, "k = " + std::to_string(k) + " needs more than " + std::to_string(d.size()) + " records");
    }
    const auto neighbours = knn_indices(d.feature_matrix(), k);
    std::vector<std::size_t> keep;
    keep.reserve(d.size());
    std::map<std::string_view, std::size_t> votes;
    for (std::size_t i = 0; i < d.size(); ++i) {
        votes.clear();
        for (auto j : neighbours[i]) ++votes[d.label(j)];
        bool disagrees = false;
        for (const auto& [label, count] : votes) {
            if (2 * count > k && label != d.label(i)) disagrees = true;
        }
        if (!disagrees) keep.push_back(i);
    }
    return d.subset(keep);
}

FlowDataset categorize(const FlowDataset& d, const ClassSchema& schema) {
    FlowDataset out(d.feature_names());
    out.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (const auto* cat = schema.category_of(d.label(i))) {
            out.append(d.row(i), *cat);
            continue;
        }
        switch (schema.unmapped_policy) {
        case UnmappedPolicy::error:
            throw Error(Errc::unmapped_class, "class '" + d.label(i) + "' has no category");
        case UnmappedPolicy::drop:
            break;
        case UnmappedPolicy::own_category:
            out.append(d.row(i), d.label(i));
            break;
        }
    }
    return out;
}

FlowDataset level1_balance(const FlowDataset& d, const DoubleBalanceSpec& spec) {
    ResamplingPlan plan{spec.level1_targets, spec.k_neighbors, derive_seed(spec.seed, 1), spec.clamp_k};
    return balance_to_level(d, plan);
}

FlowDataset double_balance(const FlowDataset& d, const DoubleBalanceSpec& spec) {
    const FlowDataset level1 = level1_balance(d, spec);
    const FlowDataset grouped = categorize(level1, spec.schema);
    ResamplingPlan plan{spec.level2_targets, spec.k_neighbors, derive_seed(spec.seed, 2), spec.clamp_k};
    return balance_to_level(grouped, plan);
}

DoubleBalanceSpec default_double_balance_spec(const FlowDataset& d, const ClassSchema& schema, std::size_t level2) {
    DoubleBalanceSpec spec;
    spec.schema = schema;
    const auto counts = d.class_counts();
    for (const auto& category : schema.category_order) {
        if (schema.is_terminal(category)) continue;
        std::vector<std::pair<std::string, std::size_t>> present;
        for (const auto& member : schema.members(category)) {
            if (auto it = counts.find(member); it != counts.end()) present.emplace_back(member, it->second);
        }
        if (present.size() < 2) continue;
        std::size_t largest = 0;
        for (const auto& [_, n] : present) largest = std::max(largest, n);
        for (const auto& [member, _] : present) spec.level1_targets[member] = largest;
    }
    std::set<std::string> categories;
    for (const auto& [cls, n] : counts) {
        if (const auto* cat = schema.category_of(cls)) {
            categories.insert(*cat);
        } else if (schema.unmapped_policy == UnmappedPolicy::own_category) {
            categories.insert(cls);
        }
    }
    for (const auto& c : categories) spec.level2_targets[c] = level2;
    return spec;
}

void to_json(nlohmann::json& j, const ResamplingPlan& p) {
    j = nlohmann::json{{"targets", p.targets}, {"k_neighbors", p.k_neighbors}, {"seed", p.seed}, {"clamp_k", p.clamp_k}};
}

void from_json(const nlohmann::json& j, ResamplingPlan& p) {
    p = ResamplingPlan{};
    j.at("targets").get_to(p.targets);
    if (j.contains("k_neighbors")) j.at("k_neighbors").get_to(p.k_neighbors);
    if (j.contains("seed")) j.at("seed").get_to(p.seed);
    if (j.contains("clamp_k")) j.at("clamp_k").get_to(p.clamp_k);
}

void to_json(nlohmann::json& j, const DoubleBalanceSpec& s) {
    j = nlohmann::json{{"level1_targets", s.level1_targets}, {"level2_targets", s.level2_targets},
                       {"k_neighbors", s.k_neighbors}, {"seed", s.seed}, {"clamp_k", s.clamp_k}};
}

void from_json(const nlohmann::json& j, DoubleBalanceSpec& s) {
    ClassSchema schema = std::move(s.schema);
    s = DoubleBalanceSpec{};
    s.schema = std::move(schema);
    if (j.contains("level1_targets")) j.at("level1_targets").get_to(s.level1_targets);
    j.at("level2_targets").get_to(s.level2_targets);
    if (j.contains("k_neighbors")) j.at("k_neighbors").get_to(s.k_neighbors);
    if (j.contains("seed")) j.at("seed").get_to(s.seed);
    if (j.contains("clamp_k")) j.at("clamp_k").get_to(s.clamp_k);
}

} // namespace flowgate
