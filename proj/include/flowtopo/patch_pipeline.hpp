#pragma once

// Patch preprocessing: contrast norm from the 3x3 grid Laplacian, top-quantile
// selection, contrast/mean normalization, DCT flow basis, coefficient
// projection, predominant direction and angle binning.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "flowtopo/common.hpp"
#include "flowtopo/flow_io.hpp"

namespace flowtopo {

inline constexpr double kZeroContrastEps = 1e-8;
inline constexpr double kIsotropicGap = 1e-6;

// Graph Laplacian of the 3x3 grid with 4-connectivity (12 edges), indexed
// column-major to match the patch vector layout. Positive semidefinite with
// kernel the constant vector; w'Dw equals the sum of squared differences over
// adjacent pixels.
struct GridLaplacian {
    std::array<std::array<double, 9>, 9> m{};
    std::array<std::array<int, 2>, 12> edges{};

    std::array<double, 9> apply(std::span<const double> w) const {
        std::array<double, 9> out{};
        for (int i = 0; i < 9; ++i) {
            double s = 0;
            for (int j = 0; j < 9; ++j) s += m[i][j] * w[j];
            out[i] = s;
        }
        return out;
    }

    // w'Dw for a scalar 9-vector.
    double quad(std::span<const double> w) const {
        double s = 0;
        for (const auto& e : edges) {
            double d = w[e[0]] - w[e[1]];
            s += d * d;
        }
        return s;
    }

    // D-inner product <a, b>_D = a'Db.
    double inner(std::span<const double> a, std::span<const double> b) const {
        double s = 0;
        for (const auto& e : edges) s += (a[e[0]] - a[e[1]]) * (b[e[0]] - b[e[1]]);
        return s;
    }
};

inline const GridLaplacian& grid_laplacian() {
    static const GridLaplacian d = [] {
        GridLaplacian g;
        int k = 0;
        auto idx = [](int row, int col) { return col * 3 + row; };
        for (int col = 0; col < 3; ++col)
            for (int row = 0; row < 2; ++row)
                g.edges[k++] = {idx(row, col), idx(row + 1, col)};
        for (int col = 0; col < 2; ++col)
            for (int row = 0; row < 3; ++row)
                g.edges[k++] = {idx(row, col), idx(row, col + 1)};
        for (const auto& e : g.edges) {
            g.m[e[0]][e[0]] += 1;
            g.m[e[1]][e[1]] += 1;
            g.m[e[0]][e[1]] -= 1;
            g.m[e[1]][e[0]] -= 1;
        }
        return g;
    }();
    return d;
}

inline double contrast_norm(const RawPatch& patch, const GridLaplacian& D = grid_laplacian()) {
    std::span<const double> u(patch.vec.data(), 9);
    std::span<const double> v(patch.vec.data() + 9, 9);
    return std::sqrt(D.quad(u) + D.quad(v));
}

// Keeps the ceil(q*N) patches of largest contrast norm; ties resolved by
// input order.
inline std::vector<RawPatch> select_top_contrast(std::span<const RawPatch> patches, double q,
                                                 const GridLaplacian& D = grid_laplacian()) {
    if (patches.empty()) fail(errc::empty_input, "select_top_contrast on empty input");
    if (!(q > 0.0 && q <= 1.0)) fail(errc::invalid_argument, "contrast fraction must be in (0,1]");

    std::vector<double> norms(patches.size());
    for (std::size_t i = 0; i < patches.size(); ++i) norms[i] = contrast_norm(patches[i], D);

    std::vector<std::size_t> order(patches.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

    auto keep = static_cast<std::size_t>(std::ceil(q * static_cast<double>(patches.size())));
    keep = std::min(keep, patches.size());
    std::vector<std::size_t> chosen(order.begin(), order.begin() + keep);
    std::sort(chosen.begin(), chosen.end());

    std::vector<RawPatch> out;
    out.reserve(keep);
    for (std::size_t i : chosen) out.push_back(patches[i]);
    return out;
}

struct NormalizedPatch {
    std::array<double, 18> vec{};
    bool contrast_normalized = false;
    bool mean_centered = false;
    PatchProvenance origin;
};

// Divides by the D-norm, then removes the average flow vector. Mean removal
// leaves the D-norm at 1 since D annihilates constants.
inline NormalizedPatch normalize(const RawPatch& patch, const GridLaplacian& D = grid_laplacian(),
                                 double eps = kZeroContrastEps) {
    double norm = contrast_norm(patch, D);
    if (!(norm > eps)) fail(errc::zero_contrast, "patch contrast norm below threshold");

    NormalizedPatch out;
    out.origin = patch.origin;
    for (int i = 0; i < 18; ++i) out.vec[i] = patch.vec[i] / norm;
    double mu = 0, mv = 0;
    for (int i = 0; i < 9; ++i) {
        mu += out.vec[i];
        mv += out.vec[i + 9];
    }
    mu /= 9;
    mv /= 9;
    for (int i = 0; i < 9; ++i) {
        out.vec[i] -= mu;
        out.vec[i + 9] -= mv;
    }
    out.contrast_normalized = true;
    out.mean_centered = true;
    return out;
}

inline NormalizedPatch normalize(const NormalizedPatch& patch,
                                 const GridLaplacian& D = grid_laplacian(),
                                 double eps = kZeroContrastEps) {
    RawPatch raw;
    raw.vec = patch.vec;
    raw.origin = patch.origin;
    return normalize(raw, D, eps);
}

// The eight non-constant 2D DCT functions on the 3x3 grid, mean-centered and
// D-normalized, together with their horizontal/vertical lifts to R^18. They
// diagonalize the grid Laplacian; e1 is the horizontal linear gradient
// (constant down each column, increasing across columns), e2 the vertical.
struct FlowBasis {
    std::array<std::array<double, 9>, 8> scalar{};   // e1..e8 as 9-vectors
    std::array<std::array<double, 9>, 8> d_scalar{}; // D * e_i, cached for projections
    std::array<double, 8> eigenvalue{};
    std::array<std::array<double, 18>, 8> u_lift{}; // (e_i, 0)
    std::array<std::array<double, 18>, 8> v_lift{}; // (0, e_i)
};

inline FlowBasis dct_flow_basis(const GridLaplacian& D = grid_laplacian()) {
    // Frequency pairs ordered: gradients first, then by Laplacian eigenvalue
    // and lexicographic (m, n). m is the horizontal (column) frequency.
    static constexpr std::array<std::array<int, 2>, 8> freq = {{
        {1, 0}, {0, 1}, {1, 1}, {0, 2}, {2, 0}, {1, 2}, {2, 1}, {2, 2},
    }};

    FlowBasis basis;
    for (int i = 0; i < 8; ++i) {
        int m = freq[i][0], n = freq[i][1];
        std::array<double, 9> b{};
        for (int col = 0; col < 3; ++col)
            for (int row = 0; row < 3; ++row) {
                // Coordinates flipped so odd-frequency modes increase along the axis.
                double cx = std::cos(m * kPi * (2.0 * (2 - col) + 1.0) / 6.0);
                double cy = std::cos(n * kPi * (2.0 * (2 - row) + 1.0) / 6.0);
                b[col * 3 + row] = cx * cy;
            }
        double mean = std::accumulate(b.begin(), b.end(), 0.0) / 9.0;
        for (double& x : b) x -= mean;
        double dnorm = std::sqrt(D.quad(b));
        for (double& x : b) x /= dnorm;

        basis.scalar[i] = b;
        basis.d_scalar[i] = D.apply(b);
        basis.eigenvalue[i] = D.inner(b, b) / std::inner_product(b.begin(), b.end(), b.begin(), 0.0);
        for (int k = 0; k < 9; ++k) {
            basis.u_lift[i][k] = b[k];
            basis.v_lift[i][k + 9] = b[k];
        }
    }
    return basis;
}

inline const FlowBasis& default_flow_basis() {
    static const FlowBasis basis = dct_flow_basis();
    return basis;
}

// D-inner-product coefficients (c1u..c8u, c1v..c8v). The basis is
// D-orthonormal on mean-zero patches, so the coefficients reconstruct the
// patch and satisfy sum(c^2) = 1 for D-normalized input.
inline std::array<double, 16> project(const NormalizedPatch& patch, const FlowBasis& basis) {
    std::array<double, 16> c{};
    for (int i = 0; i < 8; ++i) {
        double cu = 0, cv = 0;
        for (int k = 0; k < 9; ++k) {
            cu += patch.vec[k] * basis.d_scalar[i][k];
            cv += patch.vec[k + 9] * basis.d_scalar[i][k];
        }
        c[i] = cu;
        c[i + 8] = cv;
    }
    return c;
}

inline std::array<double, 18> reconstruct(const std::array<double, 16>& coeff,
                                          const FlowBasis& basis) {
    std::array<double, 18> out{};
    for (int i = 0; i < 8; ++i)
        for (int k = 0; k < 9; ++k) {
            out[k] += coeff[i] * basis.scalar[i][k];
            out[k + 9] += coeff[i + 8] * basis.scalar[i][k];
        }
    return out;
}

// Angle (mod pi) of the top principal direction of the nine flow vectors.
// Returns nullopt when the singular values are too close for the direction to
// be defined.
inline std::optional<double> predominant_direction(const NormalizedPatch& patch) {
    double a = 0, b = 0, c = 0; // entries of M'M for the 9x2 matrix of rows (u_i, v_i)
    for (int i = 0; i < 9; ++i) {
        double u = patch.vec[i], v = patch.vec[i + 9];
        a += u * u;
        b += u * v;
        c += v * v;
    }
    double tr = a + c;
    double disc = std::sqrt(std::max(0.0, (a - c) * (a - c) + 4 * b * b));
    double l1 = 0.5 * (tr + disc);
    double l2 = 0.5 * std::max(0.0, tr - disc);
    double s1 = std::sqrt(std::max(0.0, l1));
    double s2 = std::sqrt(l2);
    if (!(s1 > 1e-12)) fail(errc::invalid_value, "predominant_direction on zero matrix");
    if ((s1 - s2) / s1 < kIsotropicGap) return std::nullopt;

    double angle = 0.5 * std::atan2(2 * b, a - c);
    return reduce_mod_pi(angle);
}

// Indices of patches whose predominant direction lies within halfwidth of
// theta in the projective-line metric; isotropic patches are excluded.
inline std::vector<std::size_t> angle_bin_indices(std::span<const NormalizedPatch> patches,
                                                  double theta, double halfwidth) {
    if (!(halfwidth > 0.0 && halfwidth <= kPi / 2))
        fail(errc::invalid_argument, "bin halfwidth must be in (0, pi/2]");
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < patches.size(); ++i) {
        auto phi = predominant_direction(patches[i]);
        if (!phi) continue;
        if (angular_distance_mod_pi(*phi, theta) <= halfwidth) kept.push_back(i);
    }
    return kept;
}

inline std::vector<NormalizedPatch> angle_bin_filter(std::span<const NormalizedPatch> patches,
                                                     double theta, double halfwidth) {
    std::vector<NormalizedPatch> out;
    for (std::size_t i : angle_bin_indices(patches, theta, halfwidth)) out.push_back(patches[i]);
    return out;
}

} // namespace flowtopo
