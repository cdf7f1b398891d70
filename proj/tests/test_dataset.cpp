#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <doctest.h>

#include "flowgate/dataset.hpp"
#include "flowgate/schema.hpp"
#include "oracles.hpp"

using namespace flowgate;

namespace {

FlowDataset parse(const std::string& text) {
    std::istringstream in(text);
    return parse_csv(in);
}

FlowDataset column(std::vector<double> values, std::vector<std::string> labels = {}) {
    FlowDataset d({"x"});
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v[1] = {values[i]};
        d.append(v, labels.empty() ? "A" : labels[i]);
    }
    return d;
}

} // namespace

TEST_CASE("parse_csv reads a minimal file") {
    const auto d = parse(" Flow Duration, Flow Bytes/s, Label\n1,2,BENIGN\n3,4.5,DDoS\n");
    REQUIRE(d.size() == 2);
    CHECK(d.width() == 2);
    CHECK(d.feature_names() == std::vector<std::string>{"Flow Duration", "Flow Bytes/s"});
    CHECK(d.row(1)[1] == 4.5);
    CHECK(d.label(0) == "BENIGN");
    CHECK(d.label(1) == "DDoS");
}

TEST_CASE("parse_csv maps Infinity NaN literals to IEEE values") {
    const auto d = parse("a,Flow Bytes/s,Label\n1,Infinity,X\n2,-Infinity,X\n3,NaN,X\n");
    CHECK(std::isinf(d.row(0)[1]));
    CHECK(d.row(0)[1] > 0);
    CHECK(d.row(1)[1] < 0);
    CHECK(std::isnan(d.row(2)[1]));
}

TEST_CASE("parse_csv label column may sit anywhere and be quoted") {
    const auto d = parse("\"Label\",a\n\"Web Attack, odd\",7\n");
    CHECK(d.width() == 1);
    CHECK(d.label(0) == "Web Attack, odd");
    CHECK(d.row(0)[0] == 7);
}

TEST_CASE("parse_csv errors") {
    CHECK_ERRC(parse("a,b\n1,2\n"), Errc::missing_label_column);
    CHECK_ERRC(parse("a,Label\n1,X\n1,2,X\n"), Errc::row_width_mismatch);
    CHECK_ERRC(parse("a,Label\n1,X\nabc,X\n"), Errc::unparseable_number);
    try {
        (void)parse("a,b,Label\n1,2,X\n1,zz,X\n");
        FAIL("expected error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
    }
}

TEST_CASE("parse_csv normalizes a cp1252 dash in labels") {
    const auto d = parse("a,Label\n1,Web Attack \x96 XSS\n");
    CHECK(d.label(0) == "Web Attack \xe2\x80\x93 XSS");
    CHECK(ClassSchema::cicids2017().contains(d.label(0)));
}

TEST_CASE("write_csv round-trips finite values bit-exactly") {
    Rng rng(42);
    FlowDataset d({"a", "b", "c"});
    for (int i = 0; i < 300; ++i) {
        const double row[3] = {rng.normal() * 1e6, rng.uniform() * 1e-300, std::ldexp(rng.uniform(), 900)};
        d.append(row, i % 3 ? "x" : "y y");
    }
    std::ostringstream out;
    write_csv(d, out);
    const auto back = parse(out.str());
    REQUIRE(back.size() == d.size());
    CHECK(back.values() == d.values());
    CHECK(back.labels() == d.labels());
    CHECK(back.feature_names() == d.feature_names());
}

TEST_CASE("merge") {
    const auto d1 = column({1, 2});
    const auto d2 = column({3, 4, 5});
    const FlowDataset one[] = {d1};
    CHECK(merge(one).values() == d1.values());
    const FlowDataset two[] = {d1, d2};
    const auto m = merge(two);
    CHECK(m.size() == 5);
    CHECK(m.values() == std::vector<double>{1, 2, 3, 4, 5});
    FlowDataset wide({"x", "y"});
    const FlowDataset bad[] = {d1, wide};
    CHECK_ERRC(merge(bad), Errc::schema_mismatch);
}

TEST_CASE("clean removes non-finite records in order") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    const auto d = column({1, nan, 3, -inf, 5}, {"a", "b", "c", "d", "e"});
    const auto r = clean(d);
    CHECK(r.removed == 2);
    CHECK(r.data.labels() == std::vector<std::string>{"a", "c", "e"});
    const auto again = clean(r.data);
    CHECK(again.removed == 0);
    CHECK(again.data.values() == r.data.values());
    CHECK(clean(column({1, 2})).removed == 0);
}

TEST_CASE("fit_scaler and apply_scaler") {
    SUBCASE("column 2,4,6") {
        const auto d = column({2, 4, 6});
        const auto p = fit_scaler(d);
        CHECK(p.means[0] == doctest::Approx(4.0));
        CHECK(p.stds[0] == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-12));
        CHECK(p.stds[0] == doctest::Approx(1.63299).epsilon(1e-5));
        const auto z = apply_scaler(d, p);
        CHECK(z.row(0)[0] == doctest::Approx(-1.2247).epsilon(1e-4));
        CHECK(z.row(1)[0] == doctest::Approx(0.0));
        CHECK(z.row(2)[0] == doctest::Approx(1.2247).epsilon(1e-4));
    }
    SUBCASE("degenerate") {
        const auto single = fit_scaler(column({7}));
        CHECK(single.means[0] == 7);
        CHECK(single.stds[0] == 0);
        const auto c = column({5, 5, 5});
        const auto p = fit_scaler(c);
        CHECK(p.stds[0] == 0);
        const auto z = apply_scaler(c, p);
        for (double v : z.values()) CHECK(v == 0.0);
    }
    SUBCASE("errors") {
        CHECK_ERRC(fit_scaler(FlowDataset({"x"})), Errc::empty_dataset);
        ScalerParams p{{0, 0}, {1, 1}};
        CHECK_ERRC(apply_scaler(column({1}), p), Errc::width_mismatch);
    }
}

TEST_CASE("property: standardized columns have zero mean and unit std; refit is identity") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        Rng rng(seed);
        const std::size_t n = 2 + rng.below(300);
        const std::size_t w = 1 + rng.below(6);
        std::vector<std::string> names;
        for (std::size_t j = 0; j < w; ++j) names.push_back("f" + std::to_string(j));
        FlowDataset d(names);
        std::vector<double> row(w);
        const double scale = std::pow(10.0, rng.uniform(-3, 6));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < w; ++j) row[j] = j == 0 ? 3.0 : scale * rng.normal() + 100.0 * static_cast<double>(j);
            d.append(row, "A");
        }
        const auto z = apply_scaler(d, fit_scaler(d));
        const auto q = fit_scaler(z);
        for (std::size_t j = 0; j < w; ++j) {
            CHECK(std::abs(q.means[j]) < 1e-7);
            if (j > 0) CHECK(std::abs(q.stds[j] - 1.0) < 1e-6);
        }
        const auto z2 = apply_scaler(z, q);
        for (std::size_t i = 0; i < z.values().size(); ++i) CHECK(std::abs(z2.values()[i] - z.values()[i]) < 1e-9);
    }
}

TEST_CASE("encode_labels") {
    const auto schema = ClassSchema::cicids2017();
    const auto d = column({1, 2, 3}, {"BENIGN", "PortScan", "Bot"});
    const auto e = encode_labels(d, schema);
    CHECK(e.one_hot.cols() == 15);
    CHECK(e.indices == std::vector<std::size_t>{0, 10, 1});
    CHECK(e.one_hot(0, 0) == 1.0);
    CHECK(e.one_hot.row(0).sum() == 1.0);
    CHECK_ERRC(encode_labels(column({1}, {"NotAClass"}), schema), Errc::unknown_label);
}

TEST_CASE("property: one-hot rows sum to one and argmax round-trips") {
    const std::vector<std::string> classes = {"a", "b", "c", "d", "e"};
    Rng rng(3);
    std::vector<double> v;
    std::vector<std::string> labels;
    for (int i = 0; i < 500; ++i) {
        v.push_back(i);
        labels.push_back(classes[rng.below(classes.size())]);
    }
    const auto e = encode_labels(column(v, labels), classes);
    for (Eigen::Index i = 0; i < e.one_hot.rows(); ++i) {
        CHECK(e.one_hot.row(i).sum() == 1.0);
        Eigen::Index arg;
        e.one_hot.row(i).maxCoeff(&arg);
        CHECK(static_cast<std::size_t>(arg) == e.indices[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("split") {
    SUBCASE("100 records at 0.8") {
        std::vector<double> v(100);
        for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = i;
        const auto d = column(v);
        const auto s = split(d, SplitSpec{0.8, true, 1});
        CHECK(s.train.size() == 80);
        CHECK(s.test.size() == 20);
        const auto plain = split(d, SplitSpec{0.8, false, 1});
        CHECK(plain.train.size() == 80);
        const auto again = split(d, SplitSpec{0.8, true, 1});
        CHECK(again.train.values() == s.train.values());
        CHECK(again.test.values() == s.test.values());
    }
    SUBCASE("stratified per-class rounding") {
        std::vector<double> v;
        std::vector<std::string> l;
        for (int i = 0; i < 100; ++i) {
            v.push_back(i);
            l.push_back(i < 10 ? "A" : "B");
        }
        const auto s = split(column(v, l), SplitSpec{0.8, true, 9});
        CHECK(s.train.class_counts().at("A") == 8);
        CHECK(s.train.class_counts().at("B") == 72);
    }
    SUBCASE("class too small") {
        CHECK_ERRC(split(column({1, 2, 3}, {"A", "A", "B"}), SplitSpec{}), Errc::class_too_small);
    }
}

TEST_CASE("property: split partitions the dataset and preserves proportions") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed);
        std::vector<double> v;
        std::vector<std::string> l;
        const std::size_t classes = 1 + rng.below(5);
        for (std::size_t c = 0; c < classes; ++c) {
            const std::size_t n = 2 + rng.below(60);
            for (std::size_t i = 0; i < n; ++i) {
                v.push_back(static_cast<double>(v.size()));
                l.push_back("c" + std::to_string(c));
            }
        }
        const auto d = column(v, l);
        const double f = rng.uniform(0.1, 0.9);
        const auto s = split(d, SplitSpec{f, true, seed});
        CHECK(s.train.size() + s.test.size() == d.size());
        std::multiset<double> all(s.train.values().begin(), s.train.values().end());
        all.insert(s.test.values().begin(), s.test.values().end());
        CHECK(all == std::multiset<double>(d.values().begin(), d.values().end()));
        const auto train_counts = s.train.class_counts();
        for (const auto& [c, n] : d.class_counts()) {
            const double expected = static_cast<double>(n) * f;
            const double got = train_counts.count(c) ? static_cast<double>(train_counts.at(c)) : 0.0;
            CHECK(std::abs(got - expected) <= 1.0);
        }
    }
}

TEST_CASE("schema") {
    const auto s = ClassSchema::cicids2017();
    CHECK(s.classes.size() == 15);
    CHECK(s.category_order.size() == 7);
    CHECK(*s.category_of("DoS Hulk") == "DoS");
    CHECK(s.category_of("Heartbleed") == nullptr);
    CHECK(s.members("Patator") == std::vector<std::string>{"FTP-Patator", "SSH-Patator"});
    CHECK(s.attack_classes().size() == 14);
    const nlohmann::json j = s;
    const auto back = j.get<ClassSchema>();
    CHECK(back.classes == s.classes);
    CHECK(back.categories == s.categories);
}
