#include "flowgate/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "flowgate/error.hpp"
#include "flowgate/rng.hpp"

namespace flowgate {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : (c >> 3) == 0x1e ? 4 : 0;
        if (len == 0 || i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
        }
        i += len;
    }
    return true;
}

// The public CICIDS-2017 files spell the web-attack en dash as a single
// windows-1252 byte; everything else in them is ASCII.
std::string normalize_label(std::string_view raw) {
    if (valid_utf8(raw)) return std::string(raw);
    std::string out;
    out.reserve(raw.size() + 4);
    for (char ch : raw) {
        const auto c = static_cast<unsigned char>(ch);
        if (c == 0x96) {
            out += "\xE2\x80\x93";
        } else if (c < 0x80) {
            out += ch;
        } else {
            out += static_cast<char>(0xC0 | (c >> 6));
            out += static_cast<char>(0x80 | (c & 0x3f));
        }
    }
    return out;
}

// One RFC-4180 record; quoted fields may span lines. Returns false at EOF.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
    fields.clear();
    std::string line;
    if (!std::getline(in, line)) return false;
    ++line_no;
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    while (true) {
        if (i >= line.size()) {
            if (quoted) {
                std::string next;
                if (!std::getline(in, next)) break;
                ++line_no;
                field += '\n';
                line = std::move(next);
                i = 0;
                continue;
            }
            break;
        }
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
        ++i;
    }
    if (!field.empty() && field.back() == '\r') field.pop_back();
    fields.push_back(std::move(field));
    return true;
}

bool parse_number(std::string_view cell, double& out) {
    cell = trim(cell);
    if (cell.empty()) {
        out = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    if (cell == "Infinity" || cell == "+Infinity" || cell == "inf") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    if (cell == "-Infinity" || cell == "-inf") {
        out = -std::numeric_limits<double>::infinity();
        return true;
    }
    if (cell == "NaN" || cell == "nan") {
        out = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    if (cell.front() == '+') cell.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc{} && ptr == cell.data() + cell.size();
}

void write_field(std::ostream& out, std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

void write_number(std::ostream& out, double v) {
    if (std::isnan(v)) {
        out << "NaN";
    } else if (std::isinf(v)) {
        out << (v > 0 ? "Infinity" : "-Infinity");
    } else {
        char buf[32];
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, ptr - buf);
    }
}

} // namespace

void FlowDataset::append(std::span<const double> features, std::string label) {
    if (features.size() != width()) {
        throw Error(Errc::width_mismatch, "record has " + std::to_string(features.size()) +
                                              " features, dataset width is " + std::to_string(width()));
    }
    values_.insert(values_.end(), features.begin(), features.end());
    labels_.push_back(std::move(label));
}

void FlowDataset::reserve(std::size_t rows) {
    values_.reserve(rows * width());
    labels_.reserve(rows);
}

FlowDataset FlowDataset::subset(std::span<const std::size_t> indices) const {
    FlowDataset out(feature_names_);
    out.reserve(indices.size());
    for (auto i : indices) out.append(row(i), labels_[i]);
    return out;
}

std::map<std::string, std::vector<std::size_t>> FlowDataset::group_by_label() const {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < size(); ++i) groups[labels_[i]].push_back(i);
    return groups;
}

std::map<std::string, std::size_t> FlowDataset::class_counts() const {
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels_) ++counts[l];
    return counts;
}

FlowDataset parse_csv(std::istream& source) {
    std::vector<std::string> fields;
    std::size_t line_no = 0;
    if (!read_record(source, fields, line_no)) {
        throw Error(Errc::missing_label_column, "input is empty");
    }
    if (!fields.empty() && fields.front().starts_with("\xEF\xBB\xBF")) fields.front().erase(0, 3);

    std::vector<std::string> names;
    std::size_t label_col = fields.size();
    for (std::size_t c = 0; c < fields.size(); ++c) {
        const auto name = trim(fields[c]);
        if (name == kLabelColumn && label_col == fields.size()) {
            label_col = c;
        } else {
            names.emplace_back(name);
        }
    }
    if (label_col == fields.size()) {
        throw Error(Errc::missing_label_column, "no column named \"Label\" in header");
    }
    const std::size_t columns = fields.size();
    const std::vector<std::string> header_names(fields.begin(), fields.end());

    FlowDataset d(std::move(names));
    std::vector<double> row(d.width());
    while (true) {
        const std::size_t record_line = line_no + 1;
        if (!read_record(source, fields, line_no)) break;
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        if (fields.size() != columns) {
            throw Error(Errc::row_width_mismatch,
                        "line " + std::to_string(record_line) + ": expected " + std::to_string(columns) +
                            " cells, found " + std::to_string(fields.size()));
        }
        std::size_t f = 0;
        for (std::size_t c = 0; c < columns; ++c) {
            if (c == label_col) continue;
            if (!parse_number(fields[c], row[f])) {
                throw Error(Errc::unparseable_number, "line " + std::to_string(record_line) + ", column \"" +
                                                          std::string(trim(header_names[c])) + "\": '" +
                                                          fields[c] + "'");
            }
            ++f;
        }
        d.append(row, normalize_label(trim(fields[label_col])));
    }
    return d;
}

FlowDataset read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
    return parse_csv(in);
}

void write_csv(const FlowDataset& d, std::ostream& sink) {
    for (const auto& name : d.feature_names()) {
        write_field(sink, name);
        sink << ',';
    }
    sink << kLabelColumn << '\n';
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (double v : d.row(i)) {
            write_number(sink, v);
            sink << ',';
        }
        write_field(sink, d.label(i));
        sink << '\n';
    }
}

void write_csv_file(const FlowDataset& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::sink_unwritable, "cannot write '" + path + "'");
    write_csv(d, out);
    if (!out) throw Error(Errc::sink_unwritable, "write failed for '" + path + "'");
}

FlowDataset merge(std::span<const FlowDataset> datasets) {
    if (datasets.empty()) return FlowDataset{};
    FlowDataset out(datasets.front().feature_names());
    std::size_t total = 0;
    for (const auto& d : datasets) {
        if (d.feature_names() != out.feature_names()) {
            throw Error(Errc::schema_mismatch, "feature columns differ between merged datasets");
        }
        total += d.size();
    }
    out.reserve(total);
    for (const auto& d : datasets) {
        for (std::size_t i = 0; i < d.size(); ++i) out.append(d.row(i), d.label(i));
    }
    return out;
}

CleanResult clean(const FlowDataset& d) {
    std::vector<std::size_t> keep;
    keep.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto r = d.row(i);
        if (std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); })) keep.push_back(i);
    }
    return {d.subset(keep), d.size() - keep.size()};
}

ScalerParams fit_scaler(const FlowDataset& d) {
    if (d.empty()) throw Error(Errc::empty_dataset, "cannot fit a scaler on an empty dataset");
    const std::size_t w = d.width();
    const auto n = static_cast<double>(d.size());
    ScalerParams p{std::vector<double>(w, 0.0), std::vector<double>(w, 0.0)};
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto r = d.row(i);
        for (std::size_t j = 0; j < w; ++j) p.means[j] += r[j];
    }
    for (auto& m : p.means) m /= n;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto r = d.row(i);
        for (std::size_t j = 0; j < w; ++j) {
            const double dev = r[j] - p.means[j];
            p.stds[j] += dev * dev;
        }
    }
    for (auto& s : p.stds) s = std::sqrt(s / n);
    return p;
}

void apply_scaler_inplace(std::span<double> row, const ScalerParams& p) {
    if (row.size() != p.means.size() || row.size() != p.stds.size()) {
        throw Error(Errc::width_mismatch, "scaler width " + std::to_string(p.means.size()) +
                                              " does not match record width " + std::to_string(row.size()));
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
        row[j] = p.stds[j] == 0.0 ? 0.0 : (row[j] - p.means[j]) / p.stds[j];
    }
}

FlowDataset apply_scaler(const FlowDataset& d, const ScalerParams& p) {
    if (d.width() != p.means.size() || d.width() != p.stds.size()) {
        throw Error(Errc::width_mismatch, "scaler width " + std::to_string(p.means.size()) +
                                              " does not match dataset width " + std::to_string(d.width()));
    }
    FlowDataset out = d;
    for (std::size_t i = 0; i < out.size(); ++i) apply_scaler_inplace(out.row(i), p);
    return out;
}

LabelEncoding encode_labels(const FlowDataset& d, std::span<const std::string> classes) {
    std::map<std::string_view, std::size_t> lookup;
    for (std::size_t c = 0; c < classes.size(); ++c) lookup.emplace(classes[c], c);
    LabelEncoding enc;
    enc.indices.reserve(d.size());
    enc.one_hot = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(classes.size()));
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto it = lookup.find(d.label(i));
        if (it == lookup.end()) throw Error(Errc::unknown_label, "label '" + d.label(i) + "' not in class list");
        enc.indices.push_back(it->second);
        enc.one_hot(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(it->second)) = 1.0;
    }
    return enc;
}

SplitResult split(const FlowDataset& d, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw Error(Errc::invalid_config, "train_fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    if (spec.stratified) {
        std::uint64_t ordinal = 0;
        for (auto& [name, idx] : d.group_by_label()) {
            if (idx.size() < 2) {
                throw Error(Errc::class_too_small, "class '" + name + "' has a single record; cannot stratify");
            }
            Rng rng(derive_seed(spec.seed, ordinal++));
            rng.shuffle(std::span(idx));
            const auto n = static_cast<long long>(idx.size());
            const long long n_train =
                std::clamp(std::llround(static_cast<double>(n) * spec.train_fraction), 1LL, n - 1);
            train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + n_train);
            test_idx.insert(test_idx.end(), idx.begin() + n_train, idx.end());
        }
    } else {
        std::vector<std::size_t> idx(d.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        Rng rng(spec.seed);
        rng.shuffle(std::span(idx));
        const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(d.size()) * spec.train_fraction));
        train_idx.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        test_idx.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {d.subset(train_idx), d.subset(test_idx)};
}

void to_json(nlohmann::json& j, const ScalerParams& p) {
    j = nlohmann::json{{"means", p.means}, {"stds", p.stds}};
}

void from_json(const nlohmann::json& j, ScalerParams& p) {
    j.at("means").get_to(p.means);
    j.at("stds").get_to(p.stds);
    if (p.means.size() != p.stds.size()) throw Error(Errc::width_mismatch, "scaler means/stds lengths differ");
    for (double s : p.stds) {
        if (!(s >= 0.0)) throw Error(Errc::invalid_config, "scaler std must be >= 0");
    }
}

void to_json(nlohmann::json& j, const SplitSpec& s) {
    j = nlohmann::json{{"train_fraction", s.train_fraction}, {"stratified", s.stratified}, {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, SplitSpec& s) {
    s = SplitSpec{};
    if (j.contains("train_fraction")) j.at("train_fraction").get_to(s.train_fraction);
    if (j.contains("stratified")) j.at("stratified").get_to(s.stratified);
    if (j.contains("seed")) j.at("seed").get_to(s.seed);
}

} // namespace flowgate
