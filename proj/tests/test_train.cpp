#include "fairsel/train.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace fairsel;

namespace {

Dataset make(std::vector<std::vector<double>> xs, std::vector<int> y, int classes = 2) {
    Dataset d;
    d.class_count = classes;
    d.features = Matrix(xs.size(), xs[0].size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < xs[i].size(); ++j) d.features(i, j) = xs[i][j];
    d.labels = std::move(y);
    for (std::size_t i = 0; i < d.labels.size(); ++i) d.groups.push_back(i % 2 ? -1 : 1);
    return d;
}

double norm(const std::vector<double>& w) { return std::sqrt(squared_norm(w)); }

}  // namespace

TEST_CASE("svm: two separable points reach zero hinge") {
    auto d = make({{2, 0}, {-2, 0}}, {1, -1});
    HyperParams h;
    h.lambda = 0.01;
    auto f = fit_svm_weighted(d, Selection(2, 1), h, {});
    for (double u : f.scores.values) CHECK(u <= 1e-3);
}

TEST_CASE("svm: heavy regularization shrinks w") {
    testing::Rng r(41);
    auto d = testing::random_binary(r, 30, 3);
    HyperParams h;
    h.lambda = 1e6;
    auto f = fit_svm_weighted(d, Selection(30, 1), h, {});
    CHECK(norm(f.model.w) <= 1e-2);
}

TEST_CASE("svm: objective is stable against a 100x longer run") {
    testing::Rng r(42);
    auto d = testing::random_binary(r, 40, 2);
    HyperParams h;
    h.lambda = 0.05;
    TrainConfig cfg, big;
    big.iterations = cfg.iterations * 100;
    Selection all(40, 1);
    auto a = fit_svm_weighted(d, all, h, cfg);
    auto b = fit_svm_weighted(d, all, h, big);
    CHECK(a.objective <= b.objective * 1.01 + 1e-12);
    CHECK(a.objective == doctest::Approx(svm_objective(d, all, h, a.model)).epsilon(1e-12));
}

TEST_CASE("svm: certified residual bounds the gap to a long run") {
    testing::Rng r(43);
    for (int rep = 0; rep < 10; ++rep) {
        auto d = testing::random_binary(r, 25, 2);
        HyperParams h;
        h.lambda = 0.1;
        Selection z(25);
        for (auto& v : z.z) v = static_cast<std::uint8_t>(r.integer(0, 3) > 0);
        if (z.count() == 0) z.z[0] = 1;
        TrainConfig big;
        big.iterations = 200000;
        big.polish = false;
        auto a = fit_svm_weighted(d, z, h, {});
        auto b = fit_svm_weighted(d, z, h, big);
        if (std::isfinite(a.residual)) CHECK(a.objective <= b.objective + a.residual + 1e-9);
    }
}

TEST_CASE("svm: returned scores are the closed-form margins") {
    testing::Rng r(44);
    auto d = testing::random_binary(r, 20, 3);
    Selection z(20, 1);
    z.z[3] = 0;
    HyperParams h;
    h.lambda = 0.2;
    auto f = fit_svm_weighted(d, z, h, {});
    auto u = margins(f.model, d);
    for (std::size_t i = 0; i < 20; ++i) CHECK(std::fabs(u.values[i] - f.scores.values[i]) <= 1e-12);
    CHECK_THROWS_AS(fit_svm_weighted(d, Selection(20), h, {}), DegenerateSelection);
}

TEST_CASE("svm: the intercept is not regularized") {
    // all points on one side: the best model is w = 0 with b pushing every margin to 1
    auto d = make({{0.0}, {0.0}, {0.0}}, {1, 1, 1});
    HyperParams h;
    h.lambda = 1.0;
    auto f = fit_svm_weighted(d, Selection(3, 1), h, {});
    CHECK(f.objective == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(f.model.b >= 1.0 - 1e-9);
}

TEST_CASE("logistic: likelihoods at the zero model are log 1/2") {
    testing::Rng r(45);
    auto d = testing::random_binary(r, 10, 2);
    LinearModel m{{0.0, 0.0}, 0.0};
    for (double v : log_likelihoods(m, d).values) CHECK(v == doctest::Approx(std::log(0.5)));
}

TEST_CASE("logistic: one unregularized point saturates") {
    auto d = make({{1.0, 0.5}, {-1.0, 0.3}}, {1, -1});
    Selection z(2);
    z.z[0] = 1;
    HyperParams h;
    h.lambda = 0.0;
    TrainConfig cfg;
    cfg.iterations = 20000;
    auto f = fit_logreg_weighted(d, z, h, cfg);
    CHECK(std::exp(f.scores.values[0]) >= 0.99);
    CHECK_THROWS_AS(fit_logreg_weighted(d, Selection(2), h, cfg), DegenerateSelection);
}

TEST_CASE("logistic: gradient matches central differences") {
    testing::Rng r(46);
    auto d = testing::random_binary(r, 30, 3);
    Selection z(30);
    for (auto& v : z.z) v = static_cast<std::uint8_t>(r.integer(0, 1));
    HyperParams h;
    h.lambda = 1.0 / 30.0;
    const double step = 1e-6;
    for (int rep = 0; rep < 10; ++rep) {
        LinearModel m{{r.normal(), r.normal(), r.normal()}, r.normal()};
        auto g = logreg_gradient(d, z, h, m);
        for (std::size_t k = 0; k < 4; ++k) {
            LinearModel p = m, q = m;
            (k < 3 ? p.w[k] : p.b) += step;
            (k < 3 ? q.w[k] : q.b) -= step;
            double fd = (logreg_objective(d, z, h, p) - logreg_objective(d, z, h, q)) / (2 * step);
            CHECK(std::fabs(fd - g[k]) <= 1e-5 * std::max(1.0, std::fabs(g[k])));
        }
    }
}

TEST_CASE("logistic: doubling lambda never grows w") {
    testing::Rng r(47);
    for (int rep = 0; rep < 10; ++rep) {
        auto d = testing::random_binary(r, 30, 2);
        Selection all(30, 1);
        HyperParams h;
        h.lambda = r.uniform(0.001, 0.5);
        auto a = fit_logreg_weighted(d, all, h, {});
        h.lambda *= 2;
        auto b = fit_logreg_weighted(d, all, h, {});
        CHECK(norm(b.model.w) <= norm(a.model.w) + 1e-9);
    }
}

TEST_CASE("logistic: result beats the zero model and scores are exact") {
    testing::Rng r(48);
    auto d = testing::random_binary(r, 25, 2);
    Selection all(25, 1);
    HyperParams h;
    h.lambda = 0.1;
    auto f = fit_logreg_weighted(d, all, h, {});
    LinearModel zero{{0.0, 0.0}, 0.0};
    CHECK(f.objective <= logreg_objective(d, all, h, zero));
    auto ll = log_likelihoods(f.model, d);
    for (std::size_t i = 0; i < 25; ++i) CHECK(std::fabs(ll.values[i] - f.scores.values[i]) <= 1e-12);
}

TEST_CASE("multiclass: two classes reduce to the binary hinge") {
    testing::Rng r(49);
    auto d = testing::random_binary(r, 20, 2);
    Dataset m = d;
    m.class_count = 2;
    MulticlassModel mm;
    mm.w = Matrix(2, 2);
    for (auto& v : mm.w.values) v = r.normal();
    mm.b = {r.normal(), r.normal()};
    // binary labels: class index 0 is +1
    LinearModel lin{{mm.w(0, 0) - mm.w(1, 0), mm.w(0, 1) - mm.w(1, 1)}, mm.b[0] - mm.b[1]};
    OneHotSelection z{2, {}};
    for (std::size_t i = 0; i < 20; ++i) z.hot.push_back(m.class_index(i));
    HyperParams h;
    h.lambda = 0.0;
    CHECK(multisvm_objective(m, z, h, mm) == doctest::Approx(svm_objective(d, Selection(20, 1), h, lin)).epsilon(1e-12));
}

TEST_CASE("multiclass: separable blobs are fit exactly") {
    testing::Rng r(50);
    Dataset d;
    d.class_count = 3;
    d.features = Matrix(30, 2);
    const double cx[] = {0, 6, 0}, cy[] = {0, 0, 6};
    for (std::size_t i = 0; i < 30; ++i) {
        int k = static_cast<int>(i % 3);
        d.labels.push_back(k + 1);
        d.groups.push_back(i % 2 ? 1 : -1);
        d.features(i, 0) = cx[k] + r.normal(0, 0.3);
        d.features(i, 1) = cy[k] + r.normal(0, 0.3);
    }
    OneHotSelection z{3, {}};
    for (std::size_t i = 0; i < 30; ++i) z.hot.push_back(d.class_index(i));
    HyperParams h;
    h.lambda = 0.001;
    auto f = fit_multisvm_weighted(d, z, h, {});
    CHECK(predict(f.model, d.features) == d.labels);
}

TEST_CASE("multiclass: a wrong-hot row drops exactly that pair") {
    testing::Rng r(51);
    auto d = testing::random_multiclass(r, 8, 2, 3);
    MulticlassModel mm;
    mm.w = Matrix(3, 2);
    for (auto& v : mm.w.values) v = r.normal();
    mm.b = {r.normal(), r.normal(), r.normal()};
    OneHotSelection z{3, {}};
    for (std::size_t i = 0; i < 8; ++i) z.hot.push_back((d.class_index(i) + 1) % 3);
    HyperParams h;
    h.lambda = 0.0;
    auto u = margins(mm, d);
    double manual = 0.0;
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (static_cast<int>(j) != d.class_index(i) && static_cast<int>(j) != z.hot[i]) manual += u.values(i, j);
    CHECK(multisvm_objective(d, z, h, mm) == doctest::Approx(manual / 8.0).epsilon(1e-12));
    z.hot[0] = 3;
    CHECK_THROWS_AS(multisvm_objective(d, z, h, mm), InvalidInput);
}

TEST_CASE("kernel: linear kernel agrees with the linear svm") {
    testing::Rng r(52);
    auto d = testing::random_binary(r, 30, 2);
    Selection all(30, 1);
    HyperParams h;
    h.lambda = 0.1;
    TrainConfig cfg;
    cfg.kernel.type = KernelType::Linear;
    auto k = fit_kernel_svm(d, all, h, cfg);
    auto l = fit_svm_weighted(d, all, h, cfg);
    for (std::size_t i = 0; i < 30; ++i) CHECK(std::fabs(k.model.decision(d.x(i)) - l.model.decision(d.x(i))) <= 1e-2);
}

TEST_CASE("kernel: rbf separates xor") {
    auto d = make({{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {1, 1, -1, -1});
    HyperParams h;
    h.lambda = 0.001;
    TrainConfig cfg;
    cfg.kernel.type = KernelType::RBF;
    cfg.kernel.gamma = 2.0;
    auto f = fit_kernel_svm(d, Selection(4, 1), h, cfg);
    CHECK(f.model.predict(d.features) == d.labels);
}

TEST_CASE("kernel: one-class selections are degenerate") {
    auto d = make({{0, 0}, {1, 1}, {0, 1}}, {1, 1, -1});
    Selection z(3);
    z.z[0] = z.z[1] = 1;
    CHECK_THROWS_AS(fit_kernel_svm(d, z, {}, {}), DegenerateSelection);
    CHECK_THROWS_AS(fit_kernel_svm(d, Selection(3), {}, {}), DegenerateSelection);
}

TEST_CASE("black-box: echo contract and reply validation") {
    ConstantScorer c(0.5);
    auto s = blackbox_scores(c, {0, 2}, 4);
    CHECK(s.direction == Direction::CorrectWhenAtLeast);
    for (double v : s.values) CHECK(v == 0.5);
    CHECK_THROWS_AS(parse_scorer_reply(R"({"scores":[0.1,0.2]})", 3), ProtocolViolation);
    CHECK_THROWS_AS(parse_scorer_reply(R"({"scores":[0.1,0.2,1.2]})", 3), ScoreOutOfRange);
    CHECK_THROWS_AS(parse_scorer_reply("nope", 3), ProtocolViolation);
    CHECK(parse_scorer_reply(R"({"scores":[0,1,0.25]})", 3) == std::vector<double>{0, 1, 0.25});
    ConstantScorer bad(1.5);
    CHECK_THROWS_AS(blackbox_scores(bad, {0}, 2), ScoreOutOfRange);
}

TEST_CASE("black-box: subprocess endpoints") {
    {
        SubprocessScorer s(std::string(MOCK_SCORER) + " constant 0.25", 5000);
        auto v = blackbox_scores(s, {0, 1}, 5);
        CHECK(v.values == std::vector<double>(5, 0.25));
    }
    {
        SubprocessScorer s(std::string(MOCK_SCORER) + " short", 5000);
        CHECK_THROWS_AS(blackbox_scores(s, {0}, 5), ProtocolViolation);
    }
    {
        SubprocessScorer s(std::string(MOCK_SCORER) + " out-of-range", 5000);
        CHECK_THROWS_AS(blackbox_scores(s, {0}, 5), ScoreOutOfRange);
    }
    {
        SubprocessScorer s(std::string(MOCK_SCORER) + " hang", 300);
        CHECK_THROWS_AS(blackbox_scores(s, {0}, 5), ProtocolTimeout);
    }
}
