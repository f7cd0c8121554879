#include "fairsel/core.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace fairsel;

namespace {

Dataset one_point(std::vector<double> x, int y) {
    Dataset d;
    d.features = Matrix(1, x.size());
    for (std::size_t j = 0; j < x.size(); ++j) d.features(0, j) = x[j];
    d.labels = {y};
    d.groups = {1};
    return d;
}

}  // namespace

TEST_CASE("linear predict signs and boundary") {
    LinearModel m{{1.0, 0.0}, 0.0};
    Matrix x(1, 2);
    x(0, 0) = 2;
    x(0, 1) = -5;
    CHECK(predict(m, x) == std::vector<int>{1});
    LinearModel zero{{0.0, 0.0}, 0.0};
    CHECK(predict(zero, x) == std::vector<int>{1});
    Matrix bad(1, 3);
    CHECK_THROWS_AS(predict(m, bad), InvalidInput);
}

TEST_CASE("multiclass predict breaks ties toward the smaller class") {
    MulticlassModel m;
    m.w = Matrix(3, 1);
    m.b = {0.1, 0.9, 0.9};
    Matrix x(1, 1);
    CHECK(predict(m, x) == std::vector<int>{2});
}

TEST_CASE("hinge margins by hand") {
    LinearModel m{{1.0, 0.0}, 0.0};
    CHECK(margins(m, one_point({3, 0}, 1)).values[0] == 0.0);
    CHECK(margins(m, one_point({0.5, 0}, 1)).values[0] == doctest::Approx(0.5));
    CHECK(margins(m, one_point({1, 0}, -1)).values[0] == doctest::Approx(2.0));
}

TEST_CASE("property: margins are nonnegative and zero exactly past the margin") {
    testing::Rng r(11);
    for (int rep = 0; rep < 50; ++rep) {
        auto d = testing::random_binary(r, 20, 3);
        LinearModel m{{r.normal(), r.normal(), r.normal()}, r.normal()};
        auto u = margins(m, d);
        for (std::size_t i = 0; i < d.size(); ++i) {
            CHECK(u.values[i] >= 0.0);
            CHECK((u.values[i] == 0.0) == (d.labels[i] * m.decision(d.x(i)) >= 1.0));
        }
    }
}

TEST_CASE("property: predict is invariant under positive scaling") {
    testing::Rng r(12);
    for (int rep = 0; rep < 50; ++rep) {
        auto d = testing::random_binary(r, 30, 2);
        LinearModel m{{r.normal(), r.normal()}, r.normal()};
        double c = r.uniform(0.01, 100.0);
        LinearModel s{{c * m.w[0], c * m.w[1]}, c * m.b};
        CHECK(predict(m, d.features) == predict(s, d.features));
    }
}

TEST_CASE("one-hot rows hold exactly one entry") {
    Matrix z(2, 3);
    z(0, 1) = 1;
    z(1, 2) = 1;
    auto oh = OneHotSelection::from_matrix(z);
    CHECK(oh.hot == std::vector<int>{1, 2});
    CHECK(oh.to_matrix() == z);
    z(1, 0) = 1;
    CHECK_THROWS_AS(OneHotSelection::from_matrix(z), InvalidInput);
    Matrix empty(1, 3);
    CHECK_THROWS_AS(OneHotSelection::from_matrix(empty), InvalidInput);
}

TEST_CASE("class index mapping") {
    Dataset d;
    d.features = Matrix(2, 1);
    d.labels = {1, -1};
    d.groups = {1, -1};
    CHECK(d.class_index(0) == 0);
    CHECK(d.class_index(1) == 1);
    CHECK(d.label_of_class(1) == -1);
    d.labels = {3, 1};
    d.class_count = 3;
    CHECK(d.class_index(0) == 2);
    CHECK(d.label_of_class(2) == 3);
}

TEST_CASE("dataset and hyperparameter validation") {
    Dataset d;
    d.features = Matrix(2, 1);
    d.labels = {1, 2};
    d.groups = {1, -1};
    CHECK_THROWS_AS(d.validate(), InvalidInput);
    d.labels = {1, -1};
    d.groups = {1, 0};
    CHECK_THROWS_AS(d.validate(), InvalidInput);
    HyperParams h;
    h.lambda = -1;
    CHECK_THROWS_AS(h.validate(), InvalidInput);
    h = {};
    h.rho = -0.1;
    CHECK_THROWS_AS(h.validate(), InvalidInput);
}

TEST_CASE("fairness kind names round trip") {
    for (auto k : {FairnessKind::OMR, FairnessKind::FPR, FairnessKind::EO, FairnessKind::DP, FairnessKind::F1Complement})
        CHECK(parse_fairness_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_fairness_kind("bogus"), InvalidInput);
}
