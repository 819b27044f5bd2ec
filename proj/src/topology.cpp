#include "morsesplit/topology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "morsesplit/sampling.hpp"

namespace morsesplit {

namespace {

// Exact rank of an integer matrix by fraction-free (Bareiss) elimination.
// The relative boundary matrices are tiny (star cells only), so dense
// elimination in exact arithmetic is free.
int integer_rank(std::vector<std::vector<long long>> m) {
    const int rows = static_cast<int>(m.size());
    if (rows == 0) return 0;
    const int cols = static_cast<int>(m[0].size());
    int rank = 0;
    long long prev = 1;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r)
            if (m[r][c] != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(m[rank], m[pivot]);
        for (int r = rank + 1; r < rows; ++r) {
            for (int k = c + 1; k < cols; ++k)
                m[r][k] = (m[rank][c] * m[r][k] - m[r][c] * m[rank][k]) / prev;
            m[r][c] = 0;
        }
        prev = m[rank][c];
        ++rank;
    }
    return rank;
}

// Star cell encoding: per-axis extent in {-1, 0, +1}; the cell dimension is
// the number of nonzero axes.
int cell_dim(const std::vector<int>& cell) {
    int d = 0;
    for (int e : cell) d += (e != 0);
    return d;
}

// Vertices of a star cell, as per-axis offsets in {-1, 0, +1} grid steps.
void cell_vertices(const std::vector<int>& cell, std::vector<std::vector<int>>& out) {
    out.assign(1, std::vector<int>(cell.size(), 0));
    for (int ax = 0; ax < static_cast<int>(cell.size()); ++ax) {
        if (cell[ax] == 0) continue;
        const size_t sz = out.size();
        for (size_t i = 0; i < sz; ++i) {
            std::vector<int> v = out[i];
            v[ax] = cell[ax];
            out.push_back(std::move(v));
        }
    }
}

}  // namespace

SublevelComplex SublevelComplex::build(int dim, double radius, int resolution,
                                       const std::function<double(const Vec&)>& f, double level,
                                       bool count_cells) {
    if (dim < 1 || dim > 3) throw ConfigError("cubical homology supports dimensions 1..3");
    if (resolution < 8) throw ConfigError("resolutions must be >= 8");
    if (resolution % 2 != 0)
        throw ConfigError("resolution must be even so the origin is a grid vertex");
    SublevelComplex c;
    c.dim = dim;
    c.radius = radius;
    c.resolution = resolution;
    c.level = level;
    const double dx = 2.0 * radius / resolution;

    auto vertex_value = [&](const std::vector<int>& offsets) {
        Vec x(dim);
        for (int i = 0; i < dim; ++i) x[i] = offsets[i] * dx;
        return f(x);
    };

    // Star cells of the origin that belong to the sublevel complex.
    std::vector<int> cell(dim, 0);
    std::vector<std::vector<int>> verts;
    const std::vector<int> extents = {-1, 0, 1};
    std::function<void(int)> rec = [&](int axis) {
        if (axis == dim) {
            cell_vertices(cell, verts);
            for (const auto& v : verts)
                if (vertex_value(v) > level) return;
            c.star_cells.push_back(cell);
            return;
        }
        for (int e : extents) {
            cell[axis] = e;
            rec(axis + 1);
        }
        cell[axis] = 0;
    };
    rec(0);

    if (count_cells) {
        // Count top-dimensional cells of the sublevel complex (and the
        // punctured subcomplex) by scanning vertex values.
        const int nv = resolution + 1;
        std::vector<double> vals(static_cast<size_t>(std::pow(nv, dim)));
        std::vector<int> tmp(dim, 0);
        std::function<void(int, size_t)> fill = [&](int axis, size_t base) {
            if (axis == dim) {
                Vec x(dim);
                for (int i = 0; i < dim; ++i) x[i] = -radius + tmp[i] * dx;
                vals[base] = f(x);
                return;
            }
            for (tmp[axis] = 0; tmp[axis] < nv; ++tmp[axis]) fill(axis + 1, base * nv + tmp[axis]);
        };
        fill(0, 0);
        auto at = [&](const std::vector<int>& p) {
            size_t base = 0;
            for (int i = 0; i < dim; ++i) base = base * nv + p[i];
            return vals[base];
        };
        std::vector<int> cidx(dim, 0);
        std::function<void(int)> scan = [&](int axis) {
            if (axis == dim) {
                bool inside = true;
                std::vector<int> corner(dim, 0);
                for (int mask = 0; mask < (1 << dim) && inside; ++mask) {
                    for (int i = 0; i < dim; ++i) corner[i] = cidx[i] + ((mask >> i) & 1);
                    if (at(corner) > level) inside = false;
                }
                if (inside) {
                    ++c.cells_in;
                    bool touches = true;
                    for (int i = 0; i < dim; ++i)
                        touches = touches && (cidx[i] == resolution / 2 || cidx[i] + 1 == resolution / 2);
                    if (!touches) ++c.cells_punctured;
                }
                return;
            }
            for (cidx[axis] = 0; cidx[axis] < resolution; ++cidx[axis]) scan(axis + 1);
        };
        scan(0);
    }
    return c;
}

std::vector<int> SublevelComplex::relative_ranks() const {
    // Basis of the relative chain complex: the star cells, graded by dim.
    std::vector<std::vector<std::vector<int>>> cells_by_dim(dim + 1);
    for (const auto& cell : star_cells) cells_by_dim[cell_dim(cell)].push_back(cell);

    auto index_of = [&](int q, const std::vector<int>& cell) -> int {
        const auto& v = cells_by_dim[q];
        const auto it = std::find(v.begin(), v.end(), cell);
        return it == v.end() ? -1 : static_cast<int>(it - v.begin());
    };

    // Relative boundary: faces that keep the origin in their closure are the
    // ones where a nondegenerate axis collapses to the origin endpoint; all
    // other faces lie in the punctured subcomplex and vanish in the quotient.
    std::vector<int> rank_boundary(dim + 2, 0);
    for (int q = 1; q <= dim; ++q) {
        const auto& cols_cells = cells_by_dim[q];
        const auto& rows_cells = cells_by_dim[q - 1];
        if (cols_cells.empty() || rows_cells.empty()) continue;
        std::vector<std::vector<long long>> m(rows_cells.size(),
                                              std::vector<long long>(cols_cells.size(), 0));
        for (int cidx = 0; cidx < static_cast<int>(cols_cells.size()); ++cidx) {
            const auto& cell = cols_cells[cidx];
            int j = 0;  // position among nondegenerate axes
            for (int ax = 0; ax < dim; ++ax) {
                if (cell[ax] == 0) continue;
                ++j;
                std::vector<int> face = cell;
                face[ax] = 0;
                const int r = index_of(q - 1, face);
                if (r >= 0) {
                    // d(cell) = sum_j (-1)^{j-1} (top_j - bottom_j); the face at
                    // the origin is the bottom of [0,dx] and the top of [-dx,0].
                    const long long sign = ((j - 1) % 2 == 0 ? 1 : -1) * (cell[ax] > 0 ? -1 : 1);
                    m[r][cidx] += sign;
                }
            }
        }
        rank_boundary[q] = integer_rank(std::move(m));
    }
    std::vector<int> ranks(dim + 1, 0);
    for (int q = 0; q <= dim; ++q) {
        const int nq = static_cast<int>(cells_by_dim[q].size());
        ranks[q] = nq - rank_boundary[q] - rank_boundary[q + 1];
    }
    return ranks;
}

namespace {

// Grid-scale isolation check: a cell is a candidate zero of the vector field
// when every component takes both signs among its corners. Any candidate
// cell away from the origin fails the check.
// Per-component sign test over the corners of a box: a component that is
// strictly positive (or strictly negative) on every corner cannot vanish by
// the box test; exact corner zeros leave the component undecided.
bool box_candidate(int dim, const std::vector<Vec>& corner_grads) {
    for (int i = 0; i < dim; ++i) {
        bool pos = false, neg = false;
        for (const auto& g : corner_grads) {
            if (g[i] > 0) pos = true;
            if (g[i] < 0) neg = true;
        }
        if (pos && !neg) return false;
        if (neg && !pos) return false;
    }
    return true;
}

// Candidate cells are refined: the zero sets of different components can
// cross one coarse cell without intersecting, and subdivision separates
// them. A candidate surviving to full depth is treated as a zero.
bool refined_candidate(int dim, const Vec& lo, const Vec& hi,
                       const std::function<Vec(const Vec&)>& grad, int depth) {
    std::vector<Vec> corner_grads;
    corner_grads.reserve(1 << dim);
    for (int mask = 0; mask < (1 << dim); ++mask) {
        Vec x(dim);
        for (int i = 0; i < dim; ++i) x[i] = ((mask >> i) & 1) ? hi[i] : lo[i];
        corner_grads.push_back(grad(x));
    }
    if (!box_candidate(dim, corner_grads)) return false;
    if (depth == 0) return true;
    const Vec mid = 0.5 * (lo + hi);
    for (int mask = 0; mask < (1 << dim); ++mask) {
        Vec slo(dim), shi(dim);
        for (int i = 0; i < dim; ++i) {
            if ((mask >> i) & 1) {
                slo[i] = mid[i];
                shi[i] = hi[i];
            } else {
                slo[i] = lo[i];
                shi[i] = mid[i];
            }
        }
        if (refined_candidate(dim, slo, shi, grad, depth - 1)) return true;
    }
    return false;
}

void check_isolated_zero(int dim, double radius, int resolution,
                         const std::function<Vec(const Vec&)>& grad) {
    const double dx = 2.0 * radius / resolution;
    const int nv = resolution + 1;
    // One gradient evaluation per vertex.
    std::vector<Vec> grads(static_cast<size_t>(std::pow(nv, dim)));
    std::vector<int> vidx(dim, 0);
    std::function<void(int, size_t)> fill = [&](int axis, size_t base) {
        if (axis == dim) {
            Vec x(dim);
            for (int i = 0; i < dim; ++i) x[i] = -radius + vidx[i] * dx;
            grads[base] = grad(x);
            return;
        }
        for (vidx[axis] = 0; vidx[axis] < nv; ++vidx[axis]) fill(axis + 1, base * nv + vidx[axis]);
    };
    fill(0, 0);

    std::vector<int> cidx(dim, 0);
    std::function<void(int)> scan = [&](int axis) {
        if (axis == dim) {
            bool touches_origin = true;
            for (int i = 0; i < dim; ++i)
                touches_origin =
                    touches_origin && (cidx[i] == resolution / 2 || cidx[i] + 1 == resolution / 2);
            if (touches_origin) return;
            std::vector<Vec> corner_grads;
            corner_grads.reserve(1 << dim);
            for (int mask = 0; mask < (1 << dim); ++mask) {
                size_t base = 0;
                for (int i = 0; i < dim; ++i) base = base * nv + (cidx[i] + ((mask >> i) & 1));
                corner_grads.push_back(grads[base]);
            }
            if (!box_candidate(dim, corner_grads)) return;
            Vec lo(dim), hi(dim);
            for (int i = 0; i < dim; ++i) {
                lo[i] = -radius + cidx[i] * dx;
                hi[i] = lo[i] + dx;
            }
            if (refined_candidate(dim, lo, hi, grad, 8)) {
                std::ostringstream os;
                os << "gradient has a candidate zero cell away from theta at grid scale "
                   << "(cell index";
                for (int i = 0; i < dim; ++i) os << " " << cidx[i];
                os << "); theta is not isolated at this resolution";
                throw HomologyError(os.str());
            }
            return;
        }
        for (cidx[axis] = 0; cidx[axis] < resolution; ++cidx[axis]) scan(axis + 1);
    };
    scan(0);
}

std::vector<int> stable_ranks(int dim, double radius, int resolution,
                              const std::function<double(const Vec&)>& value) {
    const auto c1 = SublevelComplex::build(dim, radius, resolution, value);
    const auto c2 = SublevelComplex::build(dim, radius, 2 * resolution, value);
    const auto r1 = c1.relative_ranks();
    const auto r2 = c2.relative_ranks();
    if (r1 != r2) {
        std::ostringstream os;
        os << "homology not converged between resolutions " << resolution << " and "
           << 2 * resolution << ", refine grid";
        throw HomologyError(os.str());
    }
    return r1;
}

}  // namespace

std::vector<int> critical_groups_grid(int dim, double radius, int resolution,
                                      const std::function<double(const Vec&)>& value,
                                      const std::function<Vec(const Vec&)>& grad) {
    if (dim < 1 || dim > 3) throw ConfigError("critical groups need 1 <= dim <= 3");
    if (grad) check_isolated_zero(dim, radius, resolution, grad);
    return stable_ranks(dim, radius, resolution, value);
}

std::vector<int> critical_groups_reduced(const ReducedFunctional& lf, double radius,
                                         int resolution) {
    const int nu = lf.nu();
    if (nu < 1) throw ConfigError("critical_groups_reduced needs nu >= 1");
    if (nu > 3) throw ConfigError("cubical homology is capped at nu <= 3");
    // Grid corners must stay inside the certified kernel ball.
    if (radius * std::sqrt(static_cast<double>(nu)) > lf.radius() * (1.0 + 1e-12))
        throw ConfigError("topology radius exceeds the certified reduction radius");
    auto value = [&lf](const Vec& z) { return lf.value(z); };
    auto grad = [&lf](const Vec& z) { return lf.gradient(z); };
    return critical_groups_grid(nu, radius, resolution, value, grad);
}

std::vector<int> full_space_groups_oracle(const FunctionalModel& model, double radius,
                                          int resolution) {
    if (model.dim > 3) throw ConfigError("full-space oracle is limited to n <= 3");
    auto value = [&model](const Vec& x) { return model.value(x); };
    auto grad = [&model](const Vec& x) { return model.gradient(x); };
    return critical_groups_grid(model.dim, radius, resolution, value, grad);
}

// ---------------------------------------------------------------------------
// Brouwer degree

namespace {

int degree_1d(const std::function<Vec(const Vec&)>& grad, double radius) {
    Vec xp(1), xm(1);
    xp[0] = radius;
    xm[0] = -radius;
    const double gp = grad(xp)[0], gm = grad(xm)[0];
    if (gp == 0.0 || gm == 0.0) throw HomologyError("gradient vanishes on the boundary; r crosses a zero");
    const int sp = gp > 0 ? 1 : -1, sm = gm > 0 ? 1 : -1;
    return (sp - sm) / 2;
}

int degree_2d(const std::function<Vec(const Vec&)>& grad, double radius, int resolution) {
    int m = std::max(resolution, 16);
    for (int attempt = 0; attempt < 12; ++attempt, m *= 2) {
        double total = 0.0;
        bool refine = false;
        double prev_angle = 0.0;
        for (int i = 0; i <= m; ++i) {
            const double t = 2.0 * M_PI * i / m;
            Vec x(2);
            x[0] = radius * std::cos(t);
            x[1] = radius * std::sin(t);
            const Vec g = grad(x);
            if (g.norm() < 1e-14)
                throw HomologyError("gradient vanishes on the boundary; r crosses a zero");
            const double ang = std::atan2(g[1], g[0]);
            if (i > 0) {
                double inc = ang - prev_angle;
                while (inc > M_PI) inc -= 2.0 * M_PI;
                while (inc < -M_PI) inc += 2.0 * M_PI;
                if (std::abs(inc) > 0.9 * M_PI) {
                    refine = true;
                    break;
                }
                total += inc;
            }
            prev_angle = ang;
        }
        if (refine) continue;
        const double w = total / (2.0 * M_PI);
        const long long deg = std::llround(w);
        if (std::abs(w - deg) > 1e-6)
            throw HomologyError("winding number did not converge to an integer");
        return static_cast<int>(deg);
    }
    throw HomologyError("winding angle step >= pi persisted under refinement");
}

struct Tri {
    Vec a, b, c;
};

std::vector<Tri> icosphere(int subdivisions) {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    std::vector<Vec> v;
    auto add = [&](double x, double y, double z) {
        Vec p(3);
        p << x, y, z;
        v.push_back(p.normalized());
    };
    add(-1, phi, 0); add(1, phi, 0); add(-1, -phi, 0); add(1, -phi, 0);
    add(0, -1, phi); add(0, 1, phi); add(0, -1, -phi); add(0, 1, -phi);
    add(phi, 0, -1); add(phi, 0, 1); add(-phi, 0, -1); add(-phi, 0, 1);
    const int f[20][3] = {{0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                          {1, 5, 9},   {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                          {3, 9, 4},   {3, 4, 2},   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                          {4, 9, 5},   {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    std::vector<Tri> tris;
    for (auto& face : f) tris.push_back({v[face[0]], v[face[1]], v[face[2]]});
    for (int s = 0; s < subdivisions; ++s) {
        std::vector<Tri> next;
        next.reserve(tris.size() * 4);
        for (const auto& t : tris) {
            const Vec ab = ((t.a + t.b) * 0.5).normalized();
            const Vec bc = ((t.b + t.c) * 0.5).normalized();
            const Vec ca = ((t.c + t.a) * 0.5).normalized();
            next.push_back({t.a, ab, ca});
            next.push_back({t.b, bc, ab});
            next.push_back({t.c, ca, bc});
            next.push_back({ab, bc, ca});
        }
        tris = std::move(next);
    }
    return tris;
}

// Signed solid angle of the spherical triangle (Van Oosterom - Strackee).
double solid_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                   const Eigen::Vector3d& c) {
    const double num = a.dot(b.cross(c));
    const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(num, den);
}

int degree_3d(const std::function<Vec(const Vec&)>& grad, double radius, int resolution) {
    int sub = 2;
    while ((20 << (2 * sub)) < resolution * resolution / 4) ++sub;
    for (int attempt = 0; attempt < 6; ++attempt, ++sub) {
        const auto tris = icosphere(sub);
        double total = 0.0;
        bool ok = true;
        std::vector<double> partial(tris.size(), 0.0);
        std::vector<char> fail(tris.size(), 0);
        parallel_for(static_cast<int>(tris.size()), [&](int i) {
            auto image = [&](const Vec& p) -> Eigen::Vector3d {
                Vec x = radius * p;
                Vec g = grad(x);
                const double n = g.norm();
                if (n < 1e-14) {
                    fail[i] = 2;
                    return Eigen::Vector3d::Zero();
                }
                return Eigen::Vector3d(g[0] / n, g[1] / n, g[2] / n);
            };
            Eigen::Vector3d a = image(tris[i].a), b = image(tris[i].b), c = image(tris[i].c);
            if (fail[i]) return;
            // Image triangle must stay small so the spherical triangle is
            // unambiguous.
            if ((a - b).norm() > 1.0 || (b - c).norm() > 1.0 || (c - a).norm() > 1.0) {
                fail[i] = 1;
                return;
            }
            partial[i] = solid_angle(a, b, c);
        });
        for (size_t i = 0; i < tris.size(); ++i) {
            if (fail[i] == 2)
                throw HomologyError("gradient vanishes on the boundary; r crosses a zero");
            if (fail[i] == 1) ok = false;
            total += partial[i];
        }
        if (!ok) continue;
        const double w = total / (4.0 * M_PI);
        const long long deg = std::llround(w);
        if (std::abs(w - deg) > 1e-6) continue;  // refine
        return static_cast<int>(deg);
    }
    throw HomologyError("solid-angle degree did not stabilize under refinement");
}

}  // namespace

int brouwer_degree(int dim, const std::function<Vec(const Vec&)>& grad, double radius,
                   int resolution) {
    if (dim < 1 || dim > 3) throw ConfigError("brouwer_degree needs 1 <= dim <= 3");
    auto once = [&](int res) {
        switch (dim) {
            case 1: return degree_1d(grad, radius);
            case 2: return degree_2d(grad, radius, res);
            default: return degree_3d(grad, radius, res);
        }
    };
    const int d1 = once(resolution);
    const int d2 = once(2 * resolution);
    if (d1 != d2) throw HomologyError("Brouwer degree unstable under resolution doubling");
    return d1;
}

// ---------------------------------------------------------------------------
// Shift, classification, Poincare-Hopf

std::string to_string(Classification c) {
    switch (c) {
        case Classification::local_minimum: return "local_minimum";
        case Classification::mountain_pass_type: return "mountain_pass_type";
        case Classification::nondegenerate_index_mu: return "nondegenerate_index_mu";
        default: return "general";
    }
}

bool mountain_pass_detector(int mu, int nu,
                            const std::function<double(const Vec&)>& reduced_values,
                            double radius, int resolution) {
    if (mu >= 2) return false;  // the negative sphere is connected
    if (nu == 0) return mu == 1;  // {|u+|^2 - |u-|^2 < 0} splits iff mu == 1
    if (nu > 3) throw ConfigError("mountain-pass detector is capped at nu <= 3");
    if (!reduced_values) return false;  // no kernel data: detector not run

    // Vertex scan of {L0 < 0} on the kernel grid; the origin itself is
    // excluded (L0(theta) = 0 up to solver noise).
    const double dx = 2.0 * radius / resolution;
    const int nv = resolution + 1;
    std::vector<char> neg(static_cast<size_t>(std::pow(nv, nu)), 0);
    std::vector<int> idx(nu, 0);
    bool any_negative = false;
    std::function<void(int, size_t)> fill = [&](int axis, size_t base) {
        if (axis == nu) {
            bool at_origin = true;
            for (int i = 0; i < nu; ++i) at_origin = at_origin && (idx[i] == resolution / 2);
            if (at_origin) return;
            Vec z(nu);
            for (int i = 0; i < nu; ++i) z[i] = -radius + idx[i] * dx;
            const bool n = reduced_values(z) < 0.0;
            neg[base] = n;
            any_negative = any_negative || n;
            return;
        }
        for (idx[axis] = 0; idx[axis] < nv; ++idx[axis]) fill(axis + 1, base * nv + idx[axis]);
    };
    fill(0, 0);

    if (mu == 1) return !any_negative;  // two sheets u- > 0 / u- < 0 stay separate

    // mu == 0: mountain pass iff {L0 < 0} is nonempty and disconnected.
    if (!any_negative) return false;
    // Flood fill over face-adjacent negative vertices.
    std::vector<int> comp(neg.size(), -1);
    int ncomp = 0;
    std::vector<size_t> stack;
    auto coords_of = [&](size_t lin) {
        std::vector<int> c(nu);
        for (int i = nu - 1; i >= 0; --i) {
            c[i] = static_cast<int>(lin % nv);
            lin /= nv;
        }
        return c;
    };
    auto lin_of = [&](const std::vector<int>& c) {
        size_t lin = 0;
        for (int i = 0; i < nu; ++i) lin = lin * nv + c[i];
        return lin;
    };
    for (size_t s0 = 0; s0 < neg.size(); ++s0) {
        if (!neg[s0] || comp[s0] >= 0) continue;
        stack.push_back(s0);
        comp[s0] = ncomp;
        while (!stack.empty()) {
            const size_t cur = stack.back();
            stack.pop_back();
            const auto cc = coords_of(cur);
            for (int ax = 0; ax < nu; ++ax)
                for (int d : {-1, +1}) {
                    auto nb = cc;
                    nb[ax] += d;
                    if (nb[ax] < 0 || nb[ax] >= nv) continue;
                    const size_t ln = lin_of(nb);
                    if (neg[ln] && comp[ln] < 0) {
                        comp[ln] = ncomp;
                        stack.push_back(ln);
                    }
                }
        }
        ++ncomp;
    }
    return ncomp >= 2;
}

CriticalGroupReport shift(const std::vector<int>& groups_reduced, int mu, int nu,
                          const std::function<double(const Vec&)>* reduced_values, double radius,
                          int resolution) {
    CriticalGroupReport rep;
    rep.mu = mu;
    rep.nu = nu;
    rep.betti_reduced = groups_reduced;
    if (nu == 0) rep.betti_reduced = {1};  // C_q(point) = delta_q0

    rep.betti.assign(mu + nu + 1, 0);
    for (int q = 0; q <= mu + nu; ++q) {
        const int qr = q - mu;
        if (qr >= 0 && qr < static_cast<int>(rep.betti_reduced.size()))
            rep.betti[q] = rep.betti_reduced[qr];
    }

    if (reduced_values && nu >= 1 && nu <= 3)
        rep.hofer_detector = mountain_pass_detector(mu, nu, *reduced_values, radius, resolution);
    else if (nu == 0)
        rep.hofer_detector = mountain_pass_detector(mu, nu, {}, radius, resolution);

    auto is_delta = [&](int q0) {
        for (int q = 0; q < static_cast<int>(rep.betti.size()); ++q)
            if (rep.betti[q] != (q == q0 ? 1 : 0)) return false;
        return true;
    };
    if (rep.betti.size() > 0 && rep.betti[0] != 0)
        rep.classification = Classification::local_minimum;
    else if (rep.hofer_detector && rep.betti.size() > 1 && is_delta(1))
        rep.classification = Classification::mountain_pass_type;
    else if (mu < static_cast<int>(rep.betti.size()) && rep.betti[mu] != 0 && is_delta(mu))
        rep.classification = Classification::nondegenerate_index_mu;
    else
        rep.classification = Classification::general;
    return rep;
}

PoincareHopf poincare_hopf_check(const CriticalGroupReport& report, int degree_reduced, int mu) {
    PoincareHopf ph;
    for (int q = 0; q < static_cast<int>(report.betti.size()); ++q)
        ph.lhs += (q % 2 == 0 ? 1 : -1) * report.betti[q];
    long long reduced_sum = 0;
    for (int q = 0; q < static_cast<int>(report.betti_reduced.size()); ++q)
        reduced_sum += (q % 2 == 0 ? 1 : -1) * report.betti_reduced[q];
    const long long sign = (mu % 2 == 0) ? 1 : -1;
    ph.middle = sign * reduced_sum;
    ph.rhs = sign * degree_reduced;
    ph.pass = (ph.lhs == ph.middle) && (ph.middle == ph.rhs);
    return ph;
}

}  // namespace morsesplit
