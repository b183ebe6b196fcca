#pragma once

#include <cmath>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "semgeo/dataset.hpp"
#include "semgeo/embedding.hpp"

namespace fixtures {

inline Eigen::MatrixXd random_matrix(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    return m;
}

inline oracle::Points to_points(const Eigen::MatrixXd& m) {
    oracle::Points p(static_cast<std::size_t>(m.rows()), oracle::Point(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) p[i][j] = m(i, j);
    return p;
}

inline oracle::Mat to_mat(const Eigen::MatrixXd& m) { return to_points(m); }

inline semgeo::LexicalItem item(std::string label, std::string category,
                                semgeo::ItemClass cls = semgeo::ItemClass::meaningful, std::string language = "zxx",
                                std::optional<std::size_t> seq = std::nullopt) {
    semgeo::LexicalItem it;
    it.label = std::move(label);
    it.category = std::move(category);
    it.item_class = cls;
    it.language = std::move(language);
    it.sequence_index = seq;
    return it;
}

inline semgeo::Dataset make_dataset(std::string id, std::vector<semgeo::LexicalItem> items) {
    semgeo::Dataset d;
    d.id = id;
    d.name = id;
    d.items = std::move(items);
    for (const auto& it : d.items) d.declared_domains.insert(it.category);
    return d;
}

/// Dataset with one item per row, categories from `cats`.
inline semgeo::Dataset labelled(const std::vector<std::string>& cats, const std::string& id = "fixture") {
    std::vector<semgeo::LexicalItem> items;
    for (std::size_t i = 0; i < cats.size(); ++i) items.push_back(item("p" + std::to_string(i), cats[i]));
    return make_dataset(id, std::move(items));
}

struct Blobs {
    Eigen::MatrixXd x;
    std::vector<std::string> labels;
};

/// Gaussian blobs in `dim` dimensions, centres given in the first columns.
inline Blobs blobs(const std::vector<std::vector<double>>& centres, std::size_t per, double sigma, std::size_t dim,
                   std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sigma);
    Blobs b;
    b.x.resize(static_cast<Eigen::Index>(centres.size() * per), static_cast<Eigen::Index>(dim));
    Eigen::Index r = 0;
    for (std::size_t c = 0; c < centres.size(); ++c) {
        for (std::size_t i = 0; i < per; ++i, ++r) {
            for (std::size_t k = 0; k < dim; ++k) {
                b.x(r, static_cast<Eigen::Index>(k)) = (k < centres[c].size() ? centres[c][k] : 0.0) + g(rng);
            }
            b.labels.push_back("blob" + std::to_string(c));
        }
    }
    return b;
}

/// Three separated 8-D blobs (20 points each, sigma 1) on an equilateral
/// triangle of side 10, plus a 30-point ordered chain that leaves blob 0 and
/// bends through 270 degrees on a circle of radius 5. Chain items carry
/// sequence_index 0..29 in category "branch".
struct ClusterBranch {
    semgeo::AlignedData data;
    std::vector<std::size_t> blob_rows;
    std::vector<std::size_t> branch_rows;
};

inline ClusterBranch cluster_branch_fixture(std::uint64_t seed = 7) {
    const double h = 10.0 * std::sqrt(3.0) / 2.0;
    const Blobs b = blobs({{0.0, 0.0}, {10.0, 0.0}, {5.0, h}}, 20, 1.0, 8, seed);
    std::mt19937_64 rng(seed + 1000);
    std::normal_distribution<double> g(0.0, 0.05);
    const std::size_t chain = 30;
    const double pi = std::acos(-1.0);

    Eigen::MatrixXd x(b.x.rows() + static_cast<Eigen::Index>(chain), 8);
    x.topRows(b.x.rows()) = b.x;
    std::vector<semgeo::LexicalItem> items;
    ClusterBranch out;
    for (Eigen::Index i = 0; i < b.x.rows(); ++i) {
        items.push_back(item("b" + std::to_string(i), b.labels[static_cast<std::size_t>(i)]));
        out.blob_rows.push_back(static_cast<std::size_t>(i));
    }
    for (std::size_t i = 0; i < chain; ++i) {
        const double theta = 1.5 * pi * static_cast<double>(i) / static_cast<double>(chain - 1);
        const Eigen::Index r = b.x.rows() + static_cast<Eigen::Index>(i);
        for (Eigen::Index k = 0; k < 8; ++k) x(r, k) = g(rng);
        x(r, 0) += -5.0 * std::sin(theta);
        x(r, 1) += -5.0 * (1.0 - std::cos(theta));
        items.push_back(item("s" + std::to_string(i), "branch", semgeo::ItemClass::functional, "zxx", i));
        out.branch_rows.push_back(static_cast<std::size_t>(r));
    }
    out.data = semgeo::align_matrix(make_dataset("cluster_branch", std::move(items)), x);
    return out;
}

/// side x side unit lattice; points whose coordinates fall in the open
/// square (lo, hi)^2 are removed when hole = true.
inline Eigen::MatrixXd lattice(std::size_t side, bool hole = false, double lo = 0.0, double hi = 0.0) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
            const double x = static_cast<double>(i), y = static_cast<double>(j);
            if (hole && x > lo && x < hi && y > lo && y < hi) continue;
            pts.emplace_back(x, y);
        }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) << pts[i].first, pts[i].second;
    return m;
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("semgeo-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

inline std::string shipped(const std::string& name) {
    return (std::filesystem::path(SEMGEO_TEST_DATA_DIR) / (name + ".csv")).string();
}

}  // namespace fixtures
