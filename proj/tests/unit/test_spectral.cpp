#include <doctest.h>

#include <cmath>

#include "morsesplit/sampling.hpp"
#include "morsesplit/spectral.hpp"

using namespace morsesplit;

namespace {

// A model wrapping an explicit quadratic form (1/2) x^T D x.
FunctionalModel quadratic_model(const Vec& diag) {
    FunctionalModel m;
    const int n = static_cast<int>(diag.size());
    m.dim = n;
    m.name = "quadratic";
    m.value = [diag](const Vec& x) { return 0.5 * x.dot(diag.asDiagonal() * x); };
    m.gradient = [diag](const Vec& x) { return Vec(diag.asDiagonal() * x); };
    m.hessian = [diag, n](const Vec&) { return Mat(diag.asDiagonal()); };
    m.h_inner = Mat::Identity(n, n);
    m.x_norm = [](const Vec& v) { return v.norm(); };
    m.domain_radius = 1.0;
    return m;
}

}  // namespace

TEST_CASE("split on diag(2,-2)") {
    const FunctionalModel m = catalog_model("saddle_2d");
    const SpectralSplitting s = split(m, 1e-8);
    CHECK(s.nu == 0);
    CHECK(s.mu == 1);
    CHECK(s.a0 == doctest::Approx(1.0));
    CHECK(check_splitting(m, s).pass);
}

TEST_CASE("split on diag(0,2,-2)") {
    Vec d(3);
    d << 0.0, 2.0, -2.0;
    const FunctionalModel m = quadratic_model(d);
    const SpectralSplitting s = split(m, 1e-8);
    CHECK(s.nu == 1);
    CHECK(s.mu == 1);
    CHECK(s.a0 == doctest::Approx(1.0));
    // The kernel basis spans e1.
    CHECK(std::abs(s.basis_H0(0, 0)) == doctest::Approx(1.0));
    CHECK(check_splitting(m, s).pass);
}

TEST_CASE("ambiguous spectral band raises") {
    Vec d(3);
    d << 5e-8, 2.0, -2.0;  // relative tol 1e-8 * 2 = 2e-8 < 5e-8 < 2e-7
    const FunctionalModel m = quadratic_model(d);
    CHECK_THROWS_AS(split(m, 1e-8), SplitError);
}

TEST_CASE("pendulum splitting from the closed-form eigenvalues") {
    const FunctionalModel m = catalog_model("pendulum");
    const SpectralSplitting s = split(m, 1e-8);
    // Oracle: 4 sin^2(pi k/n)/dt^2 - 1 over k; at period pi only k = 0 is
    // negative and no eigenvalue vanishes.
    const int n = m.dim;
    const double dt = M_PI / n;
    int mu_oracle = 0, nu_oracle = 0;
    double min_abs = 1e300;
    for (int k = 0; k < n; ++k) {
        const double lam = 4.0 / (dt * dt) * std::pow(std::sin(M_PI * k / n), 2) - 1.0;
        if (lam < -1e-12) ++mu_oracle;
        if (std::abs(lam) <= 1e-12) ++nu_oracle;
        min_abs = std::min(min_abs, std::abs(lam));
    }
    CHECK(mu_oracle == 1);
    CHECK(nu_oracle == 0);
    CHECK(s.mu == 1);
    CHECK(s.nu == 0);
    CHECK(s.a0 == doctest::Approx(0.5 * min_abs).epsilon(1e-9));
    CHECK(check_splitting(m, s).pass);
}

TEST_CASE("monkey saddle has a fully degenerate Hessian") {
    const FunctionalModel m = catalog_model("monkey_saddle");
    const SpectralSplitting s = split(m, 1e-8);
    CHECK(s.nu == 2);
    CHECK(s.mu == 0);
    CHECK(s.dim_pm() == 0);
}

TEST_CASE("certificates: constant Hessian passes with a1 = 2 and omega = 0") {
    const FunctionalModel m = catalog_model("saddle_2d");
    const SpectralSplitting s = split(m, 1e-8);
    const ConditionCertificate cert = certify_conditions(m, s, 0.5, 16);
    CHECK(cert.pass_all());
    CHECK(cert.a1 == doctest::Approx(2.0));
    CHECK(cert.omega_max <= 1e-12);
    CHECK(cert.certified_radius == doctest::Approx(0.5));
}

TEST_CASE("certificates: quartic_min has a1 = 2 on H+") {
    const FunctionalModel m = catalog_model("quartic_min");
    const SpectralSplitting s = split(m, 1e-8);
    const ConditionCertificate cert = certify_conditions(m, s, 0.5, 16);
    CHECK(cert.pass_d2);
    CHECK(cert.a1 == doctest::Approx(2.0));
}

TEST_CASE("certificates: monkey saddle conditions are vacuous") {
    const FunctionalModel m = catalog_model("monkey_saddle");
    const SpectralSplitting s = split(m, 1e-8);
    const ConditionCertificate cert = certify_conditions(m, s, 0.4, 12);
    CHECK(cert.pass_d2);  // H+ = {0}
    CHECK(cert.pass_d4);  // H- = {0}
    CHECK(cert.a1 == 0.0);
}

TEST_CASE("split is scale-equivariant") {
    const FunctionalModel m = catalog_model("quartic_saddle");
    const SpectralSplitting s = split(m, 1e-8);
    FunctionalModel scaled = m;
    const double c = 3.7;
    scaled.value = [f = m.value, c](const Vec& x) { return c * f(x); };
    scaled.gradient = [g = m.gradient, c](const Vec& x) { return Vec(c * g(x)); };
    scaled.hessian = [h = m.hessian, c](const Vec& x) { return Mat(c * h(x)); };
    const SpectralSplitting s2 = split(scaled, 1e-8);
    CHECK(s2.nu == s.nu);
    CHECK(s2.mu == s.mu);
    CHECK((s2.P0 - s.P0).norm() < 1e-10);
    CHECK((s2.Pminus - s.Pminus).norm() < 1e-10);
    CHECK((s2.Pplus - s.Pplus).norm() < 1e-10);
    CHECK(s2.a0 == doctest::Approx(c * s.a0));
}

TEST_CASE("eigen residuals and block orthogonality on the elliptic model") {
    const FunctionalModel m = catalog_model("elliptic_resonant");
    const SpectralSplitting s = split(m, 1e-8);
    CHECK(s.nu == 1);  // resonant shift puts the first mode in the kernel
    CHECK(s.mu == 0);
    const auto c = check_splitting(m, s);
    CHECK(c.pass);
}
