#include "doctest.h"
#include "helpers.hpp"

#include "cne/cli/commands.hpp"

using namespace cne;
using namespace cne_test;

namespace {

LossSpec<double> spec_of(LossKind kind) {
    LossSpec<double> s;
    s.kind = kind;
    return s;
}

/// Context in which the mid-near weight equals `w_u_init`.
LossContext first_epoch() {
    LossContext ctx;
    ctx.epoch = 0;
    ctx.total_epochs = 10;
    return ctx;
}

/// Anchor at the origin (row 0) and further rows at the given squared distances,
/// each along its own direction so that distances between non-anchors do not matter.
Mat star(std::initializer_list<double> sq) {
    Mat z = Mat::Zero(static_cast<Index>(sq.size()) + 1, 2);
    const double pi = std::acos(-1.0);
    Index r = 1;
    for (double s : sq) {
        const double angle = 2 * pi * static_cast<double>(r) / static_cast<double>(sq.size() + 1);
        z(r, 0) = std::sqrt(s) * std::cos(angle);
        z(r, 1) = std::sqrt(s) * std::sin(angle);
        ++r;
    }
    return z;
}

double value_of(const PairBatch& batch, const Mat& z, const LossSpec<double>& spec, LossContext ctx = {}) {
    return evaluate(batch, z, spec, ctx).value;
}

Mat rigid(const Mat& z, std::uint64_t seed) {
    const auto rot = random_rotation(z.cols(), seed);
    const auto shift = random_matrix(1, z.cols(), seed + 1, 5.0);
    Mat out = z * rot;
    out.rowwise() += shift.row(0);
    return out;
}

}

TEST_SUITE("loss") {

TEST_CASE("loss names round-trip") {
    for (auto kind : all_loss_kinds) {
        CHECK(parse_loss_kind(loss_name(kind)) == kind);
    }
    CHECK_THROWS(parse_loss_kind("tsne2"));
}

TEST_CASE("tsne") {
    SUBCASE("single pair cancels and has exactly zero gradient") {
        const auto z = random_matrix(2, 2, 3);
        const auto batch = single_anchor(0, 1, {});
        const auto g = evaluate(batch, z, spec_of(LossKind::tsne));
        CHECK(g.value == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(g.grads.isZero(0.0));
    }
    SUBCASE("two pairs with similarities 0.5 and 0.2") {
        Mat z = Mat::Zero(4, 2);
        z(1, 0) = 1;
        z(2, 0) = 10;
        z(3, 0) = 12;
        PairBatch batch;
        batch.anchors = {0, 2};
        batch.positives = {1, 3};
        const double unnormalized = -(std::log(0.5) + std::log(0.2)) + 2 * std::log(0.7);
        CHECK(value_of(batch, z, spec_of(LossKind::tsne)) == doctest::Approx(unnormalized / 2).epsilon(1e-14));
        CHECK(value_of(batch, rigid(z, 4), spec_of(LossKind::tsne)) ==
              doctest::Approx(unnormalized / 2).epsilon(1e-12));
    }
}

TEST_CASE("umap and nce") {
    const auto z = star({1, 4});
    const auto batch = single_anchor(0, 1, {2});
    CHECK(value_of(batch, z, spec_of(LossKind::umap)) == doctest::Approx(-(std::log(0.5) + std::log(0.8))).epsilon(1e-14));
    CHECK(value_of(batch, z, spec_of(LossKind::umap)) == doctest::Approx(0.91629).epsilon(1e-5));
    CHECK(value_of(batch, z, spec_of(LossKind::umap)) == value_of(batch, z, spec_of(LossKind::nce)));

    // Perfect configuration: positive on top of the anchor, negative far away.
    const auto best = star({1e-14, 1e10});
    CHECK(value_of(batch, best, spec_of(LossKind::umap)) < 1e-9);
}

TEST_CASE("umap agrees with the unnormalized-kernel route") {
    const auto spec = spec_of(LossKind::umap);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto p = cli::make_check_problem(spec, 64, 2, seed);
        double total = 0;
        for (Index b = 0; b < p.batch.size(); ++b) {
            const Index i = p.batch.anchors[static_cast<std::size_t>(b)];
            const Index j = p.batch.positives[static_cast<std::size_t>(b)];
            const double u = cauchy_unnormalized(sq_dist(p.coords.row(i), p.coords.row(j)));
            total -= std::log(u / (u + 1));
            for (Index k : p.batch.negatives_of(b)) {
                const double v = cauchy_unnormalized(sq_dist(p.coords.row(i), p.coords.row(k)));
                total -= std::log(1 - v / (v + 1));
            }
        }
        total /= static_cast<double>(p.batch.size());
        const double got = value_of(p.batch, p.coords, spec);
        CHECK(std::abs(got - total) <= 1e-12 * std::abs(total));
    }
}

TEST_CASE("trimap") {
    const auto spec = spec_of(LossKind::trimap);
    SUBCASE("symmetric triplet") {
        for (double s : {0.01, 1.0, 250.0}) {
            const auto z = star({s, s});
            CHECK(value_of(single_anchor(0, 1, {2}), z, spec) == doctest::Approx(-0.5).epsilon(1e-14));
        }
    }
    SUBCASE("similarities 0.5 and 0.2") {
        const auto z = star({1, 4});
        CHECK(value_of(single_anchor(0, 1, {2}), z, spec) == doctest::Approx(-0.5 / 0.7).epsilon(1e-14));
        CHECK(value_of(single_anchor(0, 1, {2}), z, spec) == doctest::Approx(-0.714286).epsilon(1e-6));
        auto logged = spec;
        logged.flags.log_ratio = true;
        CHECK(value_of(single_anchor(0, 1, {2}), z, logged) == doctest::Approx(-std::log(0.5 / 0.7)).epsilon(1e-14));
    }
    SUBCASE("bounds with mid-near triplets") {
        auto s = spec;
        s.m = 1;
        s.schedule.w_u_init = 0.7;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto p = cli::make_check_problem(s, 64, 2, seed);
            const double v = value_of(p.batch, p.coords, s, first_epoch());
            CHECK(v < 0);
            CHECK(v > -(1 + 0.7));
        }
    }
}

TEST_CASE("pacmap") {
    auto spec = spec_of(LossKind::pacmap);
    spec.schedule.w_p = 1.5;
    auto literal = spec;
    literal.flags.paper_as_written = true;

    SUBCASE("coincident points") {
        const Mat z = Mat::Zero(3, 2);
        const auto batch = single_anchor(0, 1, {2});
        CHECK(value_of(batch, z, literal) == doctest::Approx(-1.5 / 2 - 0.5).epsilon(1e-11));
        CHECK(value_of(batch, z, spec) == doctest::Approx(-1.5 / 2 + 0.5).epsilon(1e-11));
    }
    SUBCASE("single positive with similarity 0.2") {
        auto s = spec_of(LossKind::pacmap);
        const auto z = star({4});
        CHECK(value_of(single_anchor(0, 1, {}), z, s) == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
    }
    SUBCASE("negatives are repelled; the literal term only shifts the value") {
        const auto z = star({1, 2});
        const auto batch = single_anchor(0, 1, {2});
        const auto corrected = evaluate(batch, z, spec);
        const auto as_written = evaluate(batch, z, literal);
        CHECK(as_written.value == doctest::Approx(corrected.value - 1).epsilon(1e-14));
        CHECK((corrected.grads - as_written.grads).cwiseAbs().maxCoeff() == 0.0);

        // Moving the negative outward lowers the loss ...
        const double h = 1e-6;
        Mat farther = z;
        farther.row(2) *= 1 + h;
        CHECK(value_of(batch, farther, spec) < corrected.value);
        // ... and the descent direction on the negative points away from the anchor.
        const Eigen::RowVector2d g = corrected.grads.row(2);
        CHECK(g.dot(z.row(2) - z.row(0)) < 0);
    }
}

TEST_CASE("infonce") {
    const auto spec = spec_of(LossKind::infonce);
    CHECK(value_of(single_anchor(0, 1, {2}), star({2, 2}), spec) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    const auto many = star({3, 3, 3, 3, 3, 3});
    CHECK(value_of(single_anchor(0, 1, {2, 3, 4, 5, 6}), many, spec) == doctest::Approx(std::log(6.0)).epsilon(1e-14));
    CHECK(value_of(single_anchor(0, 1, {2, 3}), star({1, 4, 9}), spec) == doctest::Approx(std::log(1.6)).epsilon(1e-14));
    CHECK(value_of(single_anchor(0, 1, {2, 3}), star({1, 4, 9}), spec) == doctest::Approx(0.470004).epsilon(1e-6));
}

TEST_CASE("sscl") {
    auto spec = spec_of(LossKind::sscl);
    SUBCASE("equal distances give ln m") {
        const auto z = star({2, 2, 2, 2});
        CHECK(value_of(single_anchor(0, 1, {2, 3, 4}), z, spec) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    }
    SUBCASE("one negative: closed forms in the distances") {
        const auto z = star({0.7, 2.9});
        const double dij = std::sqrt(0.7), dik = std::sqrt(2.9);
        for (double tau : {0.3, 1.0, 2.5}) {
            spec.tau = tau;
            // Positive excluded from the denominator: -log(e_ij / e_ik).
            CHECK(value_of(single_anchor(0, 1, {2}), z, spec) == doctest::Approx((dij - dik) / tau).epsilon(1e-13));
            // Positive included: -log sigma((d_ik - d_ij) / tau).
            auto with_pos = spec;
            with_pos.flags.denominator_includes_positive = true;
            const double sigma = 1 / (1 + std::exp(-(dik - dij) / tau));
            CHECK(value_of(single_anchor(0, 1, {2}), z, with_pos) == doctest::Approx(-std::log(sigma)).epsilon(1e-13));
        }
    }
    SUBCASE("pushing negatives away lowers the loss") {
        double previous = std::numeric_limits<double>::infinity();
        for (double far : {1.0, 10.0, 100.0, 1000.0}) {
            const auto z = star({1e-10, far, far});
            const double v = value_of(single_anchor(0, 1, {2, 3}), z, spec);
            CHECK(v < previous);
            previous = v;
        }
    }
}

TEST_CASE("snn") {
    const auto spec = spec_of(LossKind::snn);
    const auto sscl = spec_of(LossKind::sscl);
    const auto z = star({0.5, 1.5, 2.5, 3.5});

    SUBCASE("one positive per anchor equals sscl") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto p = cli::make_check_problem(spec_of(LossKind::sscl), 64, 2, seed);
            const double a = value_of(p.batch, p.coords, sscl);
            const double b = value_of(p.batch, p.coords, spec);
            CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
        }
    }
    SUBCASE("a duplicated positive subtracts ln 2") {
        Mat twin = z;
        twin.conservativeResize(6, 2);
        twin.row(5) = twin.row(1);
        auto batch = single_anchor(0, 1, {2, 3, 4});
        const double single = value_of(batch, twin, sscl);
        batch.neighbor_positives = {{1, 5}};
        CHECK(value_of(batch, twin, spec) == doctest::Approx(single - std::log(2.0)).epsilon(1e-13));
    }
    SUBCASE("empty positive set is skipped and counted") {
        PairBatch batch;
        batch.anchors = {0, 2};
        batch.positives = {1, 3};
        batch.m = 1;
        batch.negatives = {4, 4};
        batch.neighbor_positives = {{1}, {}};
        Mat g;
        const auto stats = evaluate_dense(batch, z, spec, {}, g);
        CHECK(stats.contributing_anchors == 1);
        CHECK(stats.skipped_anchors == 1);
        CHECK(stats.value == doctest::Approx(value_of(single_anchor(0, 1, {4}), z, sscl)).epsilon(1e-14));
    }
}

TEST_CASE("supcon and sup_snn") {
    const auto supcon = spec_of(LossKind::supcon);
    const auto sup_snn = spec_of(LossKind::sup_snn);
    const auto sscl = spec_of(LossKind::sscl);

    SUBCASE("a single label positive reduces to sscl") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto p = cli::make_check_problem(sscl, 64, 2, seed);
            p.batch.label_positives.assign(p.batch.anchors.size(), {});
            for (Index b = 0; b < p.batch.size(); ++b) {
                p.batch.label_positives[static_cast<std::size_t>(b)] = {p.batch.positives[static_cast<std::size_t>(b)]};
            }
            const double ref = value_of(p.batch, p.coords, sscl);
            CHECK(std::abs(value_of(p.batch, p.coords, supcon) - ref) <= 1e-12 * std::abs(ref));
            CHECK(std::abs(value_of(p.batch, p.coords, sup_snn) - ref) <= 1e-12 * std::abs(ref));
        }
    }
    SUBCASE("two equally similar positives equal one") {
        Mat z = star({1.2, 1.2, 3.0});
        auto batch = single_anchor(0, 1, {3});
        batch.label_positives = {{1}};
        const double one = value_of(batch, z, supcon);
        batch.label_positives = {{1, 2}};
        CHECK(value_of(batch, z, supcon) == doctest::Approx(one).epsilon(1e-14));
    }
    SUBCASE("sup_snn example with e = {0.6, 0.2} and unit denominator") {
        const double d1 = -std::log(0.6), d2 = -std::log(0.2), dn = std::log(2.0);
        auto z = star({d1 * d1, d2 * d2, dn * dn, dn * dn});
        auto batch = single_anchor(0, 1, {3, 4});
        batch.label_positives = {{1, 2}};
        CHECK(value_of(batch, z, sup_snn) == doctest::Approx(-std::log(0.4)).epsilon(1e-13));
        CHECK(value_of(batch, z, sup_snn) == doctest::Approx(0.916291).epsilon(1e-6));
    }
    SUBCASE("Jensen ordering") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto p = cli::make_check_problem(supcon, 64, 2, seed);
            CHECK(value_of(p.batch, p.coords, sup_snn) <= value_of(p.batch, p.coords, supcon) + 1e-12);
        }
    }
    SUBCASE("anchors without label positives are skipped") {
        auto batch = single_anchor(0, 1, {2});
        batch.label_positives = {{}};
        Mat g;
        const auto stats = evaluate_dense(batch, star({1, 2}), supcon, {}, g);
        CHECK(stats.contributing_anchors == 0);
        CHECK(stats.skipped_anchors == 1);
        CHECK(stats.value == 0.0);
        CHECK(g.isZero(0.0));
    }
    SUBCASE("missing label sets are an error") {
        CHECK_THROWS(evaluate(single_anchor(0, 1, {2}), star({1, 2}), supcon));
    }
}

TEST_CASE("tscne") {
    auto spec = spec_of(LossKind::tscne);
    auto batch = single_anchor(0, 1, {2});
    batch.label_positives = {{1}};
    const auto z = star({1.7, 1.7});

    CHECK(value_of(batch, z, spec) == doctest::Approx(-1.0).epsilon(1e-14));
    spec.flags.log_ratio = true;
    CHECK(value_of(batch, z, spec) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    SUBCASE("label positives are attracted") {
        for (bool log_ratio : {false, true}) {
            spec.flags.log_ratio = log_ratio;
            PairBatch b = single_anchor(0, 1, {3, 4});
            b.label_positives = {{1, 2}};
            const auto zz = star({0.8, 2.0, 1.5, 3.0});
            const double h = 1e-6;
            for (Index p : {1, 2}) {
                Mat out = zz, in = zz;
                out.row(p) *= std::sqrt(1 + h / zz.row(p).squaredNorm());
                in.row(p) *= std::sqrt(1 - h / zz.row(p).squaredNorm());
                const double slope = (value_of(b, out, spec) - value_of(b, in, spec)) / (2 * h);
                CHECK(slope > 0);
            }
        }
    }
    SUBCASE("mid-near term uses the graph positive") {
        spec.flags.log_ratio = false;
        spec.schedule.w_u_init = 1;
        auto b = single_anchor(0, 1, {2});
        b.label_positives = {{1}};
        b.n_midnear = 1;
        b.midnears = {3};
        const auto zz = star({1, 1, 4});
        // -phi_ij/phi_ik - w_U phi_ij/phi_iu = -1 - 0.5/0.2
        CHECK(value_of(b, zz, spec, first_epoch()) == doctest::Approx(-1 - 2.5).epsilon(1e-14));
    }
}

TEST_CASE("gradients match finite differences for every loss and variant") {
    cli::GradcheckOptions opt;
    opt.losses.assign(all_loss_kinds.begin(), all_loss_kinds.end());
    opt.batches = 3;
    for (const auto& row : cli::run_gradcheck(opt)) {
        INFO(row.loss << " " << row.variant);
        CHECK(row.max_error < 1e-6);
    }
}

TEST_CASE("finite-difference error plateaus across step sizes") {
    for (auto kind : {LossKind::infonce, LossKind::tscne, LossKind::sup_snn}) {
        const auto spec = spec_of(kind);
        const auto p = cli::make_check_problem(spec, 64, 2, 21);
        const double e4 = grad_check(spec, p.batch, p.coords, 1e-4, first_epoch());
        const double e5 = grad_check(spec, p.batch, p.coords, 1e-5, first_epoch());
        const double e6 = grad_check(spec, p.batch, p.coords, 1e-6, first_epoch());
        CHECK(e4 < 1e-4);
        CHECK(e5 < 1e-7);
        CHECK(e6 < 1e-7);
    }
    const auto p = cli::make_check_problem(spec_of(LossKind::umap), 64, 2, 0);
    CHECK_THROWS(grad_check(spec_of(LossKind::umap), p.batch, p.coords, 1e-2));
    CHECK(grad_check(spec_of(LossKind::umap), p.batch, p.coords, 1e-6, {}, 1.5) > 1e-4);
}

TEST_CASE("values are invariant under rigid motions and gradients sum to zero") {
    for (auto kind : all_loss_kinds) {
        const auto spec = spec_of(kind);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto p = cli::make_check_problem(spec, 64, 2, seed);
            const auto g = evaluate(p.batch, p.coords, spec, first_epoch());
            const double moved = value_of(p.batch, rigid(p.coords, seed + 100), spec, first_epoch());
            INFO(loss_name(kind));
            CHECK(std::abs(moved - g.value) <= 1e-10 * std::max(1.0, std::abs(g.value)));
            CHECK(g.grads.colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
            CHECK(g.grads.allFinite());
        }
    }
}

TEST_CASE("sparse gradient covers exactly the batch participants") {
    const auto spec = spec_of(LossKind::umap);
    const auto p = cli::make_check_problem(spec, 64, 2, 1);
    const auto g = evaluate(p.batch, p.coords, spec);
    CHECK(g.indices == participants(p.batch));
    Mat dense;
    evaluate_dense(p.batch, p.coords, spec, {}, dense);
    for (Index i = 0; i < dense.rows(); ++i) {
        if (!std::binary_search(g.indices.begin(), g.indices.end(), i)) {
            CHECK(dense.row(i).isZero(0.0));
        }
    }
}

TEST_CASE("deterministic evaluation does not depend on the worker count") {
    for (auto kind : {LossKind::umap, LossKind::supcon, LossKind::tscne}) {
        const auto spec = spec_of(kind);
        const auto p = cli::make_check_problem(spec, 64, 2, 5);
        LossContext one, many;
        one.workers = 1;
        many.workers = 4;
        Mat g1, g4;
        const auto s1 = evaluate_dense(p.batch, p.coords, spec, one, g1);
        const auto s4 = evaluate_dense(p.batch, p.coords, spec, many, g4);
        CHECK(s1.value == s4.value);
        CHECK(g1 == g4);
    }
}

TEST_CASE("finite gradients across the distance range, and errors on bad input") {
    for (auto kind : all_loss_kinds) {
        const auto spec = spec_of(kind);
        auto p = cli::make_check_problem(spec, 64, 2, 8);
        for (double scale : {1e-6, 1e3}) {
            const Mat z = p.coords * scale;
            CHECK(evaluate(p.batch, z, spec, first_epoch()).grads.allFinite());
        }
        Mat bad = p.coords;
        bad(p.batch.anchors[0], 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(evaluate(p.batch, bad, spec), NumericalError);
    }
    auto batch = single_anchor(0, 7, {1});
    CHECK_THROWS(evaluate(batch, star({1, 2}), spec_of(LossKind::umap)));
}

TEST_CASE("LossSpec validation and flags") {
    auto s = spec_of(LossKind::trimap);
    s.flags.log_ratio = true;
    s.flags.paper_as_written = true;
    CHECK_FALSE(s.effective_flags().log_ratio);
    CHECK_FALSE(s.effective_flags().corrected_pacmap_sign);
    s.m = 0;
    CHECK_THROWS(s.validate());
    s.m = 1;
    s.tau = 0;
    CHECK_THROWS(s.validate());
}

}
