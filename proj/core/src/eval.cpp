#include "flowgate/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "flowgate/error.hpp"

namespace flowgate {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

// Linear ramp from near-white to dark blue.
std::string ramp(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(247 + (8 - 247) * t));
    const int g = static_cast<int>(std::lround(251 + (48 - 251) * t));
    const int b = static_cast<int>(std::lround(255 + (107 - 255) * t));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::sink_unwritable, "cannot write '" + path + "'");
    out << text;
    if (!out) throw Error(Errc::sink_unwritable, "write failed for '" + path + "'");
}

} // namespace

std::uint64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

ConfusionMatrix confusion(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                          std::vector<std::string> class_names) {
    if (y_true.size() != y_pred.size()) {
        throw Error(Errc::length_mismatch, std::to_string(y_true.size()) + " true labels vs " +
                                               std::to_string(y_pred.size()) + " predictions");
    }
    const std::size_t c = class_names.size();
    ConfusionMatrix cm{std::move(class_names), std::vector<std::uint64_t>(c * c, 0)};
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] >= c || y_pred[i] >= c) {
            throw Error(Errc::index_out_of_range, "label index at position " + std::to_string(i) + " exceeds " +
                                                      std::to_string(c) + " classes");
        }
        ++cm.counts[y_true[i] * c + y_pred[i]];
    }
    return cm;
}

EvalReport metrics(const ConfusionMatrix& cm) {
    EvalReport r;
    r.confusion = cm;
    const std::size_t c = cm.classes();
    const std::uint64_t total = cm.total();
    std::uint64_t trace = 0;
    r.per_class.resize(c);
    for (std::size_t k = 0; k < c; ++k) {
        auto& m = r.per_class[k];
        m.tp = cm.at(k, k);
        trace += m.tp;
        for (std::size_t j = 0; j < c; ++j) {
            if (j == k) continue;
            m.fn += cm.at(k, j);
            m.fp += cm.at(j, k);
        }
        m.tn = total - m.tp - m.fn - m.fp;
        m.precision = ratio(m.tp, m.tp + m.fp);
        m.recall = ratio(m.tp, m.tp + m.fn);
        const double pr = m.precision + m.recall;
        m.f1 = pr == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / pr;
        r.macro_f1 += m.f1;
    }
    r.accuracy = ratio(trace, total);
    r.macro_f1 = c == 0 ? 0.0 : r.macro_f1 / static_cast<double>(c);
    return r;
}

EvalReport evaluate(const LabelPredictor& predictor, const FlowDataset& test,
                    const std::vector<std::string>& class_names) {
    if (test.empty()) throw Error(Errc::empty_dataset, "test set is empty");
    const auto truth = encode_labels(test, class_names).indices;
    const auto predicted_labels = predictor(test);
    if (predicted_labels.size() != test.size()) {
        throw Error(Errc::length_mismatch, "predictor returned " + std::to_string(predicted_labels.size()) +
                                               " labels for " + std::to_string(test.size()) + " records");
    }
    std::map<std::string_view, std::size_t> lookup;
    for (std::size_t k = 0; k < class_names.size(); ++k) lookup.emplace(class_names[k], k);
    std::vector<std::size_t> predicted(predicted_labels.size());
    for (std::size_t i = 0; i < predicted_labels.size(); ++i) {
        auto it = lookup.find(predicted_labels[i]);
        if (it == lookup.end()) throw Error(Errc::unknown_label, "predicted label '" + predicted_labels[i] + "'");
        predicted[i] = it->second;
    }
    return metrics(confusion(truth, predicted, class_names));
}

ContrastReport contrast(EvalReport balanced, EvalReport original) {
    ContrastReport c{std::move(balanced), std::move(original), {}};
    const auto& names = c.balanced.confusion.class_names;
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto& other = c.original.confusion.class_names;
        auto it = std::find(other.begin(), other.end(), names[k]);
        const double original_f1 =
            it == other.end() ? 0.0 : c.original.per_class[static_cast<std::size_t>(it - other.begin())].f1;
        c.f1_delta[names[k]] = c.balanced.per_class[k].f1 - original_f1;
    }
    return c;
}

ContrastReport contrast(const LabelPredictor& predictor, const FlowDataset& balanced_test,
                        const FlowDataset& original_test, const std::vector<std::string>& class_names) {
    return contrast(evaluate(predictor, balanced_test, class_names), evaluate(predictor, original_test, class_names));
}

std::string render_heatmap(const ConfusionMatrix& cm, const std::string& title) {
    const std::size_t c = std::max<std::size_t>(cm.classes(), 1);
    constexpr int cell = 48;
    constexpr int margin_left = 170;
    constexpr int margin_top = 60;
    constexpr int margin_bottom = 170;
    const int grid = static_cast<int>(c) * cell;
    const int width = margin_left + grid + 20;
    const int height = margin_top + grid + margin_bottom;

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
    if (!title.empty()) {
        svg << "<text x=\"" << margin_left << "\" y=\"24\" font-size=\"16\">" << xml_escape(title) << "</text>\n";
    }
    svg << "<text x=\"" << margin_left + grid / 2 << "\" y=\"" << margin_top - 10
        << "\" font-size=\"12\" text-anchor=\"middle\">predicted</text>\n";
    for (std::size_t i = 0; i < cm.classes(); ++i) {
        std::uint64_t row_total = 0;
        for (std::size_t j = 0; j < cm.classes(); ++j) row_total += cm.at(i, j);
        for (std::size_t j = 0; j < cm.classes(); ++j) {
            const double v = ratio(cm.at(i, j), row_total);
            const int x = margin_left + static_cast<int>(j) * cell;
            const int y = margin_top + static_cast<int>(i) * cell;
            svg << "<rect class=\"cell\" x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\""
                << cell << "\" fill=\"" << ramp(v) << "\" stroke=\"#cccccc\"/>\n";
            svg << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4
                << "\" font-size=\"10\" text-anchor=\"middle\" fill=\"" << (v > 0.5 ? "#ffffff" : "#000000")
                << "\">" << cm.at(i, j) << "</text>\n";
        }
        const int y = margin_top + static_cast<int>(i) * cell + cell / 2 + 4;
        svg << "<text class=\"row-label\" x=\"" << margin_left - 6 << "\" y=\"" << y
            << "\" font-size=\"11\" text-anchor=\"end\">" << xml_escape(cm.class_names[i]) << "</text>\n";
        const int x = margin_left + static_cast<int>(i) * cell + cell / 2;
        const int ly = margin_top + grid + 8;
        svg << "<text class=\"col-label\" x=\"" << x << "\" y=\"" << ly << "\" font-size=\"11\" transform=\"rotate(60 "
            << x << ' ' << ly << ")\">" << xml_escape(cm.class_names[i]) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json per_class = nlohmann::json::object();
    for (std::size_t k = 0; k < r.per_class.size(); ++k) {
        const auto& m = r.per_class[k];
        per_class[r.confusion.class_names[k]] = {
            {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support()},
            {"tp", m.tp},               {"fp", m.fp},         {"fn", m.fn}, {"tn", m.tn},
        };
    }
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < r.confusion.classes(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < r.confusion.classes(); ++j) row.push_back(r.confusion.at(i, j));
        rows.push_back(std::move(row));
    }
    return {
        {"accuracy", r.accuracy},
        {"macro_f1", r.macro_f1},
        {"per_class", std::move(per_class)},
        {"confusion", {{"classes", r.confusion.class_names}, {"counts", std::move(rows)}}},
    };
}

nlohmann::json report_to_json(const ContrastReport& r) {
    return {
        {"balanced", report_to_json(r.balanced)},
        {"original", report_to_json(r.original)},
        {"f1_delta", r.f1_delta},
    };
}

std::string confusion_csv(const ConfusionMatrix& cm) {
    std::ostringstream out;
    out << "true\\predicted";
    for (const auto& name : cm.class_names) out << ',' << csv_field(name);
    out << '\n';
    for (std::size_t i = 0; i < cm.classes(); ++i) {
        out << csv_field(cm.class_names[i]);
        for (std::size_t j = 0; j < cm.classes(); ++j) out << ',' << cm.at(i, j);
        out << '\n';
    }
    return out.str();
}

void write_report(const EvalReport& r, const std::string& stem) {
    write_text(stem + ".json", report_to_json(r).dump(2) + "\n");
    write_text(stem + ".csv", confusion_csv(r.confusion));
}

void write_report(const ContrastReport& r, const std::string& stem) {
    write_text(stem + ".json", report_to_json(r).dump(2) + "\n");
    write_text(stem + "_balanced.csv", confusion_csv(r.balanced.confusion));
    write_text(stem + "_original.csv", confusion_csv(r.original.confusion));
}

} // namespace flowgate
