#include "morsesplit/sampling.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>

namespace morsesplit {

namespace {

constexpr unsigned kPrimes[] = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,
    47,  53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107,
    109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181,
    191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263};
constexpr int kNumPrimes = sizeof(kPrimes) / sizeof(kPrimes[0]);

unsigned prime_for_axis(int axis) {
    // Past the table, fall back to a co-prime-ish odd stride; dimensions that
    // large only occur for grid problems where sample quality is uncritical.
    if (axis < kNumPrimes) return kPrimes[axis];
    return 2 * static_cast<unsigned>(axis) + 7;
}

}  // namespace

double radical_inverse(std::uint64_t index, unsigned base) {
    double inv_base = 1.0 / base, f = inv_base, r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv_base;
    }
    return r;
}

Vec halton_point(std::uint64_t index, int dim) {
    Vec p(dim);
    for (int i = 0; i < dim; ++i)
        p[i] = radical_inverse(index, prime_for_axis(i));
    return p;
}

double norminv(double p) {
    // Peter Acklam's algorithm.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > phigh) {
        q = std::sqrt(-2 * std::log(1 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

std::vector<Vec> halton_ball(int dim, double radius, int count, std::uint64_t skip) {
    std::vector<Vec> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
        const std::uint64_t idx = skip + static_cast<std::uint64_t>(k) + 1;
        Vec q = halton_point(idx, dim + 1);
        Vec dir(dim);
        for (int i = 0; i < dim; ++i) dir[i] = norminv(q[i]);
        double n = dir.norm();
        if (n < 1e-300) {
            dir.setZero();
            dir[0] = 1.0;
            n = 1.0;
        }
        const double rad = radius * std::pow(q[dim], 1.0 / dim);
        pts.push_back((rad / n) * dir);
    }
    return pts;
}

std::vector<Vec> halton_sphere(int dim, int count, std::uint64_t skip) {
    std::vector<Vec> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
        const std::uint64_t idx = skip + static_cast<std::uint64_t>(k) + 1;
        Vec q = halton_point(idx, dim);
        Vec dir(dim);
        for (int i = 0; i < dim; ++i) dir[i] = norminv(q[i]);
        double n = dir.norm();
        if (n < 1e-300) {
            dir.setZero();
            dir[0] = 1.0;
            n = 1.0;
        }
        pts.push_back(dir / n);
    }
    return pts;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    int threads = 0;
    if (const char* env = std::getenv("MORSESPLIT_THREADS")) threads = std::atoi(env);
    if (threads <= 0)
        threads = static_cast<int>(std::min(8u, std::max(1u, std::thread::hardware_concurrency())));
    threads = std::min(threads, n);
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace morsesplit
