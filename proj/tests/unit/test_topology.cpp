#include <doctest.h>

#include <cmath>

#include "morsesplit/topology.hpp"

using namespace morsesplit;

namespace {

// Independent dense-rational oracle for the relative pair homology: build
// the whole sublevel complex (not just the star) at a coarse resolution and
// run floating LU ranks over the full relative boundary matrices. Shares no
// code with the star-local engine.
struct DenseCell {
    std::vector<int> anchor;   // lower corner vertex, grid indices
    std::vector<int> extent;   // per axis 0/1
};

std::vector<int> dense_pair_ranks(int dim, double radius, int resolution,
                                  const std::function<double(const Vec&)>& f) {
    const double dx = 2.0 * radius / resolution;
    const int nv = resolution + 1;
    auto value_at = [&](const std::vector<int>& v) {
        Vec x(dim);
        for (int i = 0; i < dim; ++i) x[i] = -radius + v[i] * dx;
        return f(x);
    };
    auto contains_origin = [&](const DenseCell& c) {
        for (int i = 0; i < dim; ++i) {
            const int lo = c.anchor[i], hi = c.anchor[i] + c.extent[i];
            if (resolution / 2 < lo || resolution / 2 > hi) return false;
        }
        return true;
    };
    // Enumerate all cells of all dimensions in the sublevel complex.
    std::vector<std::vector<DenseCell>> cells(dim + 1);
    std::vector<int> anchor(dim, 0), extent(dim, 0);
    std::function<void(int)> rec_extent = [&](int axis_e) {
        if (axis_e == dim) {
            std::function<void(int)> rec_anchor = [&](int axis_a) {
                if (axis_a == dim) {
                    // All vertices of the cell must be <= 0.
                    bool inside = true;
                    std::vector<int> v(dim);
                    int q = 0;
                    for (int i = 0; i < dim; ++i) q += extent[i];
                    for (int mask = 0; mask < (1 << dim) && inside; ++mask) {
                        bool valid = true;
                        for (int i = 0; i < dim; ++i) {
                            v[i] = anchor[i] + (((mask >> i) & 1) ? extent[i] : 0);
                            if (v[i] >= nv) valid = false;
                        }
                        if (!valid) continue;
                        if (value_at(v) > 0.0) inside = false;
                    }
                    for (int i = 0; i < dim; ++i)
                        if (anchor[i] + extent[i] >= nv) inside = false;
                    if (inside) cells[q].push_back({anchor, extent});
                    return;
                }
                for (anchor[axis_a] = 0; anchor[axis_a] < nv; ++anchor[axis_a]) rec_anchor(axis_a + 1);
                anchor[axis_a] = 0;
            };
            rec_anchor(0);
            return;
        }
        for (extent[axis_e] = 0; extent[axis_e] <= 1; ++extent[axis_e]) rec_extent(axis_e + 1);
        extent[axis_e] = 0;
    };
    rec_extent(0);

    // Relative basis: cells whose closure contains the origin vertex.
    std::vector<std::vector<DenseCell>> rel(dim + 1);
    for (int q = 0; q <= dim; ++q)
        for (const auto& c : cells[q])
            if (contains_origin(c)) rel[q].push_back(c);

    auto find_index = [&](int q, const DenseCell& c) -> int {
        for (size_t i = 0; i < rel[q].size(); ++i)
            if (rel[q][i].anchor == c.anchor && rel[q][i].extent == c.extent)
                return static_cast<int>(i);
        return -1;
    };
    std::vector<int> rank_b(dim + 2, 0);
    for (int q = 1; q <= dim; ++q) {
        if (rel[q].empty() || rel[q - 1].empty()) continue;
        Mat B = Mat::Zero(rel[q - 1].size(), rel[q].size());
        for (size_t cidx = 0; cidx < rel[q].size(); ++cidx) {
            const auto& c = rel[q][cidx];
            int j = 0;
            for (int ax = 0; ax < dim; ++ax) {
                if (c.extent[ax] == 0) continue;
                ++j;
                const double sgn = (j % 2 == 1) ? 1.0 : -1.0;
                DenseCell top = c, bottom = c;
                top.extent[ax] = 0;
                top.anchor[ax] += 1;
                bottom.extent[ax] = 0;
                const int ti = find_index(q - 1, top);
                const int bi = find_index(q - 1, bottom);
                if (ti >= 0) B(ti, cidx) += sgn;
                if (bi >= 0) B(bi, cidx) -= sgn;
            }
        }
        Eigen::FullPivLU<Mat> lu(B);
        lu.setThreshold(1e-10);
        rank_b[q] = static_cast<int>(lu.rank());
    }
    std::vector<int> ranks(dim + 1, 0);
    for (int q = 0; q <= dim; ++q)
        ranks[q] = static_cast<int>(rel[q].size()) - rank_b[q] - rank_b[q + 1];
    return ranks;
}

double monkey(const Vec& z) { return z[0] * z[0] * z[0] - 3.0 * z[0] * z[1] * z[1]; }

}  // namespace

TEST_CASE("1d pair homology: minimum and maximum fibers") {
    auto zquartic = [](const Vec& z) { return std::pow(z[0], 4); };
    auto neg_zquartic = [](const Vec& z) { return -std::pow(z[0], 4); };
    // z^4: the sublevel set is the origin alone; C = (1, 0).
    CHECK(critical_groups_grid(1, 0.5, 64, zquartic, nullptr) == std::vector<int>{1, 0});
    // -z^4: full interval, puncture leaves two components; C = (0, 1).
    CHECK(critical_groups_grid(1, 0.5, 64, neg_zquartic, nullptr) == std::vector<int>{0, 1});
}

TEST_CASE("star-local ranks agree with the dense whole-complex oracle") {
    const std::vector<std::function<double(const Vec&)>> fields2 = {
        [](const Vec& z) { return z[0] * z[0] + z[1] * z[1]; },
        [](const Vec& z) { return z[0] * z[0] - z[1] * z[1]; },
        [](const Vec& z) { return -z[0] * z[0] - z[1] * z[1]; },
        monkey,
        [](const Vec& z) { return std::pow(z[0], 4) - z[1] * z[1]; },
        [](const Vec& z) { return std::pow(z[0], 4) + std::pow(z[1], 4); },
        [](const Vec& z) { return z[0] * z[1]; },
    };
    for (size_t i = 0; i < fields2.size(); ++i) {
        CAPTURE(i);
        const auto star = SublevelComplex::build(2, 0.5, 8, fields2[i]).relative_ranks();
        const auto dense = dense_pair_ranks(2, 0.5, 8, fields2[i]);
        CHECK(star == dense);
    }
    const std::vector<std::function<double(const Vec&)>> fields3 = {
        [](const Vec& z) { return monkey(z) + z[2] * z[2]; },
        [](const Vec& z) { return z[0] * z[0] + z[1] * z[1] - z[2] * z[2]; },
        [](const Vec& z) { return -z.squaredNorm(); },
    };
    for (size_t i = 0; i < fields3.size(); ++i) {
        CAPTURE(i);
        const auto star = SublevelComplex::build(3, 0.5, 8, fields3[i]).relative_ranks();
        const auto dense = dense_pair_ranks(3, 0.5, 8, fields3[i]);
        CHECK(star == dense);
    }
}

TEST_CASE("monkey saddle: C_1 has rank 2 at resolutions 64 and 128") {
    const auto r64 = SublevelComplex::build(2, 0.5, 64, monkey).relative_ranks();
    const auto r128 = SublevelComplex::build(2, 0.5, 128, monkey).relative_ranks();
    CHECK(r64 == std::vector<int>{0, 2, 0});
    CHECK(r128 == std::vector<int>{0, 2, 0});
    auto grad = [](const Vec& z) {
        Vec g(2);
        g[0] = 3.0 * (z[0] * z[0] - z[1] * z[1]);
        g[1] = -6.0 * z[0] * z[1];
        return g;
    };
    CHECK(critical_groups_grid(2, 0.5, 64, monkey, grad) == std::vector<int>{0, 2, 0});
}

TEST_CASE("full-space oracle on the catalog 2d problems") {
    CHECK(full_space_groups_oracle(catalog_model("quartic_min"), 0.3, 64) ==
          std::vector<int>{1, 0, 0});
    CHECK(full_space_groups_oracle(catalog_model("saddle_2d"), 0.3, 64) ==
          std::vector<int>{0, 1, 0});
    CHECK(full_space_groups_oracle(catalog_model("quartic_saddle"), 0.3, 64) ==
          std::vector<int>{0, 1, 0});
    CHECK(full_space_groups_oracle(catalog_model("coupled_quartic"), 0.3, 64) ==
          std::vector<int>{1, 0, 0});
    CHECK(full_space_groups_oracle(catalog_model("double_well"), 0.3, 64) ==
          std::vector<int>{0, 1, 0});
    CHECK(full_space_groups_oracle(catalog_model("quartic_mountain_pass"), 0.3, 64) ==
          std::vector<int>{0, 1, 0});
}

TEST_CASE("homology errors: non-isolated zero and odd resolution") {
    auto flat = [](const Vec& z) { return z[0] * z[0] * 0.0; };
    auto flat_grad = [](const Vec&) { return Vec(Vec::Zero(1)); };
    CHECK_THROWS_AS(critical_groups_grid(1, 0.5, 64, flat, flat_grad), HomologyError);
    auto zsq = [](const Vec& z) { return z[0] * z[0]; };
    CHECK_THROWS_AS(SublevelComplex::build(1, 0.5, 63, zsq), ConfigError);
    CHECK_THROWS_AS(SublevelComplex::build(1, 0.5, 4, zsq), ConfigError);
}

TEST_CASE("brouwer degree in one dimension") {
    auto grad_sq = [](const Vec& z) { return Vec(2.0 * z); };                   // of z^2
    auto grad_q = [](const Vec& z) { return Vec(4.0 * z.array().pow(3)); };     // of z^4
    auto grad_nq = [](const Vec& z) { return Vec(-4.0 * z.array().pow(3)); };   // of -z^4
    CHECK(brouwer_degree(1, grad_sq, 0.4, 16) == 1);
    CHECK(brouwer_degree(1, grad_q, 0.4, 16) == 1);
    CHECK(brouwer_degree(1, grad_nq, 0.4, 16) == -1);
}

TEST_CASE("brouwer degree in two dimensions by winding number") {
    auto grad_monkey = [](const Vec& z) {
        Vec g(2);
        g[0] = 3.0 * (z[0] * z[0] - z[1] * z[1]);
        g[1] = -6.0 * z[0] * z[1];
        return g;
    };
    CHECK(brouwer_degree(2, grad_monkey, 0.4, 64) == -2);
    auto ident = [](const Vec& z) { return z; };
    CHECK(brouwer_degree(2, ident, 0.4, 64) == 1);
    auto saddle = [](const Vec& z) {
        Vec g(2);
        g << 2.0 * z[0], -2.0 * z[1];
        return g;
    };
    CHECK(brouwer_degree(2, saddle, 0.4, 64) == -1);
}

TEST_CASE("brouwer degree in three dimensions by solid angles") {
    auto ident = [](const Vec& z) { return z; };
    CHECK(brouwer_degree(3, ident, 0.4, 32) == 1);
    auto saddle = [](const Vec& z) {
        Vec g(3);
        g << 2.0 * z[0], 2.0 * z[1], -2.0 * z[2];
        return g;
    };
    CHECK(brouwer_degree(3, saddle, 0.4, 32) == -1);
    auto monkey3 = [](const Vec& z) {
        Vec g(3);
        g[0] = 3.0 * (z[0] * z[0] - z[1] * z[1]);
        g[1] = -6.0 * z[0] * z[1];
        g[2] = 2.0 * z[2];
        return g;
    };
    CHECK(brouwer_degree(3, monkey3, 0.4, 32) == -2);
}

TEST_CASE("degree errors when the field vanishes on the boundary") {
    auto g = [](const Vec& z) {
        Vec v(1);
        v[0] = (z[0] - 0.4) * (z[0] + 0.1);
        return v;
    };
    CHECK_THROWS_AS(brouwer_degree(1, g, 0.4, 16), HomologyError);
}

TEST_CASE("shift: nondegenerate saddle via the nu = 0 path") {
    const auto rep = shift({}, 1, 0);
    CHECK(rep.betti == std::vector<int>{0, 1});
    CHECK(rep.betti_reduced == std::vector<int>{1});
    CHECK(rep.hofer_detector);  // mu == 1 with empty kernel
    CHECK(rep.classification == Classification::mountain_pass_type);
}

TEST_CASE("shift: local minimum pattern") {
    const auto rep = shift({1, 0}, 0, 1);
    CHECK(rep.betti == std::vector<int>{1, 0});
    CHECK(rep.classification == Classification::local_minimum);
}

TEST_CASE("shift: x^4 - y^2 pattern matches the mu-shift of z^4") {
    auto zq = [](const Vec& z) { return std::pow(z[0], 4); };
    std::function<double(const Vec&)> f = zq;
    const auto rep = shift({1, 0}, 1, 1, &f, 0.4, 64);
    CHECK(rep.betti == std::vector<int>{0, 1, 0});
    CHECK(rep.hofer_detector);  // {z^4 < 0} is empty near theta
    CHECK(rep.classification == Classification::mountain_pass_type);
}

TEST_CASE("shift: general label for the monkey saddle groups") {
    std::function<double(const Vec&)> f = monkey;
    const auto rep = shift({0, 2, 0}, 0, 2, &f, 0.4, 64);
    CHECK(rep.betti == std::vector<int>{0, 2, 0});
    CHECK(rep.hofer_detector);  // three wedges: nonempty and disconnected
    CHECK(rep.classification == Classification::general);  // groups are not delta_q1
}

TEST_CASE("mountain pass detector distinguishes minimum from pass") {
    std::function<double(const Vec&)> plus = [](const Vec& z) { return std::pow(z[0], 4); };
    std::function<double(const Vec&)> minus = [](const Vec& z) { return -std::pow(z[0], 4); };
    CHECK_FALSE(mountain_pass_detector(0, 1, plus, 0.4, 64));  // sublevel empty
    CHECK(mountain_pass_detector(0, 1, minus, 0.4, 64));       // two components
    CHECK_FALSE(mountain_pass_detector(1, 1, minus, 0.4, 64)); // sheets joined through z
    CHECK(mountain_pass_detector(1, 1, plus, 0.4, 64));        // sheets separated
    CHECK_FALSE(mountain_pass_detector(2, 0, {}, 0.4, 64));    // negative sphere connected
}

TEST_CASE("poincare-hopf ledger on hand-checked cases") {
    // quartic_min: groups (1,0,0) shifted with mu = 0, degree 1.
    auto rep = shift({1, 0}, 0, 1);
    auto ph = poincare_hopf_check(rep, 1, 0);
    CHECK(ph.lhs == 1);
    CHECK(ph.middle == 1);
    CHECK(ph.rhs == 1);
    CHECK(ph.pass);

    // saddle_2d: delta_q1, mu = 1, reduced degree 1 by convention.
    rep = shift({}, 1, 0);
    ph = poincare_hopf_check(rep, 1, 1);
    CHECK(ph.lhs == -1);
    CHECK(ph.rhs == -1);
    CHECK(ph.pass);

    // monkey saddle: sum = -2 against (+1) * (-2).
    rep = shift({0, 2, 0}, 0, 2);
    ph = poincare_hopf_check(rep, -2, 0);
    CHECK(ph.lhs == -2);
    CHECK(ph.rhs == -2);
    CHECK(ph.pass);

    // A mismatch is reported, not silently accepted.
    ph = poincare_hopf_check(rep, 2, 0);
    CHECK_FALSE(ph.pass);
}

TEST_CASE("excision: halving the radius preserves the ranks") {
    for (double r : {0.5, 0.25}) {
        CHECK(SublevelComplex::build(2, r, 64, monkey).relative_ranks() ==
              std::vector<int>{0, 2, 0});
    }
}

TEST_CASE("sublevel complex counts cells when asked") {
    auto neg = [](const Vec& z) { return -z.squaredNorm(); };
    const auto c = SublevelComplex::build(1, 0.5, 8, neg, 0.0, true);
    CHECK(c.cells_in == 8);
    CHECK(c.cells_punctured == 6);  // the two star edges are removed
}
