#pragma once

// Finite-metric utilities feeding the topology layers: distance matrices,
// k-NN density, dense-core extraction, random subsampling, maxmin landmarks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "flowtopo/common.hpp"

namespace flowtopo {

// Points of uniform dimension stored row-major, with optional per-point
// metadata (an angle label and synthetic parameters) carried through
// subsetting operations.
struct PointCloud {
    std::size_t dim = 0;
    std::vector<double> data;
    std::vector<double> label;                  // empty or one per point
    std::vector<std::array<double, 2>> params;  // empty or one per point
    std::string provenance;

    std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
    std::span<const double> point(std::size_t i) const {
        return {data.data() + i * dim, dim};
    }
    void push(std::span<const double> p) {
        if (dim == 0) dim = p.size();
        if (p.size() != dim) fail(errc::dimension_mismatch, "point dimension mismatch");
        data.insert(data.end(), p.begin(), p.end());
    }

    void validate() const {
        if (dim < 1) fail(errc::dimension_mismatch, "point cloud has no dimension");
        if (data.size() % dim != 0) fail(errc::dimension_mismatch, "point data not a multiple of dim");
        if (!label.empty() && label.size() != size())
            fail(errc::dimension_mismatch, "label count does not match point count");
        if (!params.empty() && params.size() != size())
            fail(errc::dimension_mismatch, "params count does not match point count");
        for (double x : data)
            if (!std::isfinite(x)) fail(errc::invalid_value, "point cloud contains non-finite entry");
    }
};

inline PointCloud subset_cloud(const PointCloud& cloud, std::span<const std::size_t> indices) {
    PointCloud out;
    out.dim = cloud.dim;
    out.provenance = cloud.provenance;
    out.data.reserve(indices.size() * cloud.dim);
    for (std::size_t i : indices) {
        auto p = cloud.point(i);
        out.data.insert(out.data.end(), p.begin(), p.end());
        if (!cloud.label.empty()) out.label.push_back(cloud.label[i]);
        if (!cloud.params.empty()) out.params.push_back(cloud.params[i]);
    }
    return out;
}

struct DistanceMatrix {
    std::size_t n = 0;
    std::vector<double> d; // n*n, symmetric, zero diagonal

    double at(std::size_t i, std::size_t j) const { return d[i * n + j]; }
    double& at(std::size_t i, std::size_t j) { return d[i * n + j]; }
};

// Rectangular distance table (rows = one set, cols = another).
struct DistanceTable {
    std::size_t rows = 0, cols = 0;
    std::vector<double> d;

    double at(std::size_t i, std::size_t j) const { return d[i * cols + j]; }
    double& at(std::size_t i, std::size_t j) { return d[i * cols + j]; }
};

inline double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double t = a[k] - b[k];
        s += t * t;
    }
    return std::sqrt(s);
}

inline DistanceMatrix distance_matrix(const PointCloud& cloud) {
    if (cloud.size() == 0) fail(errc::empty_input, "distance_matrix on empty cloud");
    cloud.validate();
    DistanceMatrix dm;
    dm.n = cloud.size();
    dm.d.assign(dm.n * dm.n, 0.0);
    for (std::size_t i = 0; i < dm.n; ++i)
        for (std::size_t j = i + 1; j < dm.n; ++j) {
            double dist = euclidean(cloud.point(i), cloud.point(j));
            dm.at(i, j) = dist;
            dm.at(j, i) = dist;
        }
    return dm;
}

inline DistanceMatrix submatrix(const DistanceMatrix& dm, std::span<const std::size_t> indices) {
    DistanceMatrix out;
    out.n = indices.size();
    out.d.assign(out.n * out.n, 0.0);
    for (std::size_t i = 0; i < out.n; ++i)
        for (std::size_t j = 0; j < out.n; ++j) out.at(i, j) = dm.at(indices[i], indices[j]);
    return out;
}

inline DistanceTable cross_distances(const PointCloud& rows, const PointCloud& cols) {
    if (rows.dim != cols.dim) fail(errc::dimension_mismatch, "cross_distances dimension mismatch");
    DistanceTable t;
    t.rows = rows.size();
    t.cols = cols.size();
    t.d.resize(t.rows * t.cols);
    for (std::size_t i = 0; i < t.rows; ++i)
        for (std::size_t j = 0; j < t.cols; ++j)
            t.at(i, j) = euclidean(rows.point(i), cols.point(j));
    return t;
}

// rho_k(i) = distance from point i to its k-th nearest neighbor (self
// excluded). Inversely proportional to density.
inline std::vector<double> knn_density(const DistanceMatrix& dm, std::size_t k) {
    if (dm.n < 2) fail(errc::empty_input, "knn_density needs at least 2 points");
    if (k < 1 || k > dm.n - 1) fail(errc::k_too_large, "k must be in [1, n-1]");
    std::vector<double> rho(dm.n);
    std::vector<double> row(dm.n - 1);
    for (std::size_t i = 0; i < dm.n; ++i) {
        std::size_t m = 0;
        for (std::size_t j = 0; j < dm.n; ++j)
            if (j != i) row[m++] = dm.at(i, j);
        std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
        rho[i] = row[k - 1];
    }
    return rho;
}

// Indices of the ceil(p/100 * n) points of smallest rho_k, ties by index.
inline std::vector<std::size_t> densest_core_indices(const DistanceMatrix& dm, std::size_t k,
                                                     double p_percent) {
    if (!(p_percent > 0.0 && p_percent <= 100.0))
        fail(errc::invalid_argument, "core percentage must be in (0, 100]");
    std::vector<double> rho = knn_density(dm, k);
    std::vector<std::size_t> order(dm.n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rho[a] < rho[b]; });
    auto keep = static_cast<std::size_t>(std::ceil(p_percent / 100.0 * static_cast<double>(dm.n)));
    keep = std::min(keep, dm.n);
    order.resize(keep);
    std::sort(order.begin(), order.end());
    return order;
}

inline PointCloud densest_core(const PointCloud& cloud, std::size_t k, double p_percent) {
    DistanceMatrix dm = distance_matrix(cloud);
    auto idx = densest_core_indices(dm, k, p_percent);
    return subset_cloud(cloud, idx);
}

// Uniform sample of n points without replacement (identity when the cloud is
// already small enough); kept indices are returned in ascending order.
inline std::vector<std::size_t> random_subsample_indices(std::size_t total, std::size_t n,
                                                         std::uint64_t seed) {
    if (n < 1) fail(errc::invalid_argument, "subsample size must be >= 1");
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    if (total <= n) return idx;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i + rng.index(total - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    return idx;
}

inline PointCloud random_subsample(const PointCloud& cloud, std::size_t n, std::uint64_t seed) {
    auto idx = random_subsample_indices(cloud.size(), n, seed);
    if (idx.size() == cloud.size()) return cloud;
    return subset_cloud(cloud, idx);
}

// Greedy farthest-point landmarks: repeatedly take the point maximizing the
// distance to the chosen set, smallest index on ties. Returns indices in
// selection order.
inline std::vector<std::size_t> maxmin_sample(const DistanceMatrix& dm, std::size_t m,
                                              std::size_t start = 0) {
    if (dm.n == 0) fail(errc::empty_input, "maxmin_sample on empty matrix");
    if (m < 1 || m > dm.n) fail(errc::invalid_argument, "landmark count must be in [1, n]");
    if (start >= dm.n) fail(errc::invalid_argument, "start index out of range");

    std::vector<std::size_t> landmarks;
    landmarks.reserve(m);
    landmarks.push_back(start);
    std::vector<double> mindist(dm.n, std::numeric_limits<double>::infinity());
    std::vector<char> chosen(dm.n, 0);
    chosen[start] = 1;
    for (std::size_t t = 1; t < m; ++t) {
        std::size_t last = landmarks.back();
        for (std::size_t i = 0; i < dm.n; ++i)
            mindist[i] = std::min(mindist[i], dm.at(last, i));
        std::size_t best = dm.n;
        double best_d = -1;
        for (std::size_t i = 0; i < dm.n; ++i) {
            if (chosen[i]) continue;
            if (mindist[i] > best_d) {
                best_d = mindist[i];
                best = i;
            }
        }
        landmarks.push_back(best);
        chosen[best] = 1;
    }
    return landmarks;
}

// max over points of min distance to a landmark; the covering radius of L.
inline double cover_radius(const DistanceMatrix& dm, std::span<const std::size_t> landmarks) {
    double worst = 0;
    for (std::size_t i = 0; i < dm.n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t l : landmarks) best = std::min(best, dm.at(i, l));
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace flowtopo
