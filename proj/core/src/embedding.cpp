#include "semgeo/embedding.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "hash.hpp"
#include "semgeo/error.hpp"

namespace semgeo {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kManifestSuffix = ".manifest.json";
constexpr std::string_view kMatrixSuffix = ".f32";

std::string little_endian_bytes(const FloatMatrix& m) {
    std::string bytes(static_cast<std::size_t>(m.size()) * 4, '\0');
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        auto u = std::bit_cast<std::uint32_t>(m.data()[i]);
        for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<char>((u >> (8 * b)) & 0xFF);
    }
    return bytes;
}

fs::path with_suffix(const fs::path& prefix, std::string_view suffix) {
    return fs::path(prefix.string() + std::string(suffix));
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::string matrix_checksum(const FloatMatrix& m) {
    return "sha256:" + detail::sha256_hex(little_endian_bytes(m));
}

void validate(const EmbeddingBundle& b) {
    if (b.matrix.rows() == 0 || b.labels.empty()) throw ValidationError("empty embedding bundle");
    if (b.matrix.cols() == 0) throw ValidationError("embedding bundle has dim 0");
    if (b.labels.size() != b.count()) {
        throw ValidationError("bundle has " + std::to_string(b.labels.size()) + " labels but " +
                              std::to_string(b.count()) + " matrix rows");
    }
    std::set<std::string_view> seen;
    for (const auto& l : b.labels) {
        if (!seen.insert(l).second) throw ValidationError("duplicate bundle label '" + l + "'");
    }
    for (Eigen::Index r = 0; r < b.matrix.rows(); ++r) {
        if (!b.matrix.row(r).allFinite()) {
            throw NumericError("non-finite value in bundle row " + std::to_string(r) + " ('" +
                               b.labels[r] + "')");
        }
    }
    if (b.checksum != matrix_checksum(b.matrix)) {
        throw ValidationError("bundle checksum mismatch: manifest says " + b.checksum);
    }
}

EmbeddingBundle make_bundle(std::string model_id, std::vector<std::string> labels, FloatMatrix matrix) {
    EmbeddingBundle b;
    b.model_id = std::move(model_id);
    b.labels = std::move(labels);
    b.matrix = std::move(matrix);
    b.checksum = matrix_checksum(b.matrix);
    validate(b);
    return b;
}

fs::path bundle_prefix(const fs::path& path) {
    const std::string s = path.string();
    if (s.ends_with(kManifestSuffix)) return s.substr(0, s.size() - kManifestSuffix.size());
    if (s.ends_with(kMatrixSuffix)) return s.substr(0, s.size() - kMatrixSuffix.size());
    return path;
}

void write_bundle(const EmbeddingBundle& bundle, const fs::path& prefix_in) {
    validate(bundle);
    const auto prefix = bundle_prefix(prefix_in);
    if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());

    json manifest = {
        {"model_id", bundle.model_id},
        {"dim", bundle.dim()},
        {"count", bundle.count()},
        {"dtype", "f32"},
        {"byte_order", "little"},
        {"labels", bundle.labels},
        {"checksum", bundle.checksum},
    };
    {
        std::ofstream out(with_suffix(prefix, kManifestSuffix), std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + with_suffix(prefix, kManifestSuffix).string());
        out << manifest.dump(2) << '\n';
    }
    std::ofstream out(with_suffix(prefix, kMatrixSuffix), std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + with_suffix(prefix, kMatrixSuffix).string());
    const auto bytes = little_endian_bytes(bundle.matrix);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + with_suffix(prefix, kMatrixSuffix).string());
}

EmbeddingBundle read_bundle(const fs::path& path) {
    const auto prefix = bundle_prefix(path);
    const auto manifest_path = with_suffix(prefix, kManifestSuffix);
    const auto matrix_path = with_suffix(prefix, kMatrixSuffix);

    json m;
    try {
        m = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw ValidationError("malformed bundle manifest " + manifest_path.string() + ": " + e.what());
    }

    EmbeddingBundle b;
    std::size_t count = 0, dim = 0;
    try {
        b.model_id = m.at("model_id").get<std::string>();
        dim = m.at("dim").get<std::size_t>();
        count = m.at("count").get<std::size_t>();
        b.labels = m.at("labels").get<std::vector<std::string>>();
        b.checksum = m.at("checksum").get<std::string>();
        if (m.at("dtype").get<std::string>() != "f32") throw ValidationError("bundle dtype must be f32");
        if (m.at("byte_order").get<std::string>() != "little") {
            throw ValidationError("bundle byte_order must be little");
        }
    } catch (const json::exception& e) {
        throw ValidationError("bundle manifest " + manifest_path.string() + ": " + e.what());
    }
    if (count == 0) throw ValidationError("empty embedding bundle");
    if (dim == 0) throw ValidationError("embedding bundle has dim 0");
    if (b.labels.size() != count) {
        throw ValidationError("manifest count " + std::to_string(count) + " disagrees with " +
                              std::to_string(b.labels.size()) + " labels");
    }

    const std::string bytes = read_file(matrix_path);
    const std::size_t expected = count * dim * 4;
    if (bytes.size() != expected) {
        throw ValidationError("matrix file " + matrix_path.string() + " has " + std::to_string(bytes.size()) +
                              " bytes, manifest implies " + std::to_string(expected) + " (" +
                              std::to_string(count) + "x" + std::to_string(dim) + " f32)");
    }
    b.matrix.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < count * dim; ++i) {
        std::uint32_t u = 0;
        for (int k = 0; k < 4; ++k) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + k])) << (8 * k);
        b.matrix.data()[i] = std::bit_cast<float>(u);
    }
    validate(b);
    return b;
}

AlignedData align(const Dataset& dataset, const EmbeddingBundle& bundle) {
    std::map<std::string_view, Eigen::Index> row_of;
    for (std::size_t i = 0; i < bundle.labels.size(); ++i) row_of.emplace(bundle.labels[i], static_cast<Eigen::Index>(i));

    std::vector<std::string> missing;
    for (const auto& it : dataset.items) {
        if (!row_of.contains(it.label)) missing.push_back(it.label);
    }
    if (!missing.empty()) {
        std::string msg = std::to_string(missing.size()) + " dataset label(s) missing from bundle: ";
        for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
        throw NotFoundError(msg);
    }

    AlignedData out;
    out.dataset = dataset;
    out.bundle_checksum = bundle.checksum;
    out.matrix.resize(static_cast<Eigen::Index>(dataset.size()), bundle.matrix.cols());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        out.matrix.row(static_cast<Eigen::Index>(i)) =
            bundle.matrix.row(row_of.at(dataset.items[i].label)).cast<double>();
    }
    return out;
}

AlignedData align_matrix(const Dataset& dataset, const Eigen::MatrixXd& matrix) {
    if (static_cast<std::size_t>(matrix.rows()) != dataset.size()) {
        throw ValidationError("matrix has " + std::to_string(matrix.rows()) + " rows for " +
                              std::to_string(dataset.size()) + " items");
    }
    return AlignedData{dataset, matrix, {}};
}

void normalize_rows(AlignedData& data) {
    for (Eigen::Index r = 0; r < data.matrix.rows(); ++r) {
        const double norm = data.matrix.row(r).norm();
        if (!(norm > 0.0)) {
            throw NumericError("cannot normalize zero embedding row " + std::to_string(r) + " ('" +
                               data.dataset.items[r].label + "')");
        }
        data.matrix.row(r) /= norm;
    }
}

EmbeddingBundle synthetic_bundle(const Dataset& dataset, std::size_t dim, std::uint64_t seed) {
    if (dataset.items.empty()) throw ValidationError("empty embedding bundle");
    if (dim == 0) throw ValidationError("synthetic dim must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto d = static_cast<Eigen::Index>(dim);

    auto random_vector = [&](double scale) {
        Eigen::VectorXd v(d);
        for (Eigen::Index i = 0; i < d; ++i) v[i] = scale * normal(rng);
        return v;
    };

    // Categories are visited in sorted order so the centres do not depend on
    // row order in the file.
    std::map<std::string, Eigen::VectorXd> centres;
    for (const auto& it : dataset.items) centres.emplace(it.category, Eigen::VectorXd());
    for (auto& [name, c] : centres) c = random_vector(3.0);

    std::map<std::pair<std::string, std::string>, Eigen::VectorXd> directions;
    for (const auto& it : dataset.items) {
        if (it.sequence_index) directions.emplace(std::make_pair(it.category, it.network_root.value_or("")), Eigen::VectorXd());
    }
    for (auto& [key, dir] : directions) {
        dir = random_vector(1.0);
        dir.normalize();
    }

    FloatMatrix m(static_cast<Eigen::Index>(dataset.size()), d);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& it = dataset.items[i];
        Eigen::VectorXd row = centres.at(it.category) + random_vector(0.35);
        if (it.sequence_index) {
            row += 0.6 * static_cast<double>(*it.sequence_index) *
                   directions.at({it.category, it.network_root.value_or("")});
        }
        m.row(static_cast<Eigen::Index>(i)) = row.cast<float>().transpose();
    }
    return make_bundle("synthetic:seed=" + std::to_string(seed), dataset.labels(), std::move(m));
}

}  // namespace semgeo
