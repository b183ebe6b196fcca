#include "semgeo/projection.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "csv.hpp"
#include "hash.hpp"
#include "json.hpp"
#include "semgeo/baselines.hpp"
#include "semgeo/error.hpp"
#include "semgeo/phate.hpp"

namespace semgeo {
namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(MethodId m) {
    switch (m) {
        case MethodId::phate: return "phate";
        case MethodId::pca: return "pca";
        case MethodId::cmds: return "cmds";
        case MethodId::spectral: return "spectral";
    }
    return "?";
}

MethodId parse_method(std::string_view s) {
    for (MethodId m : kAllMethods) {
        if (to_string(m) == s) return m;
    }
    throw ValidationError("unknown method '" + std::string(s) + "' (valid: phate, pca, cmds, spectral)");
}

void validate(const ProjectionParams& params, std::size_t n) {
    const auto& p = params.phate;
    if (p.out_dims == 0) throw ValidationError("out_dims must be at least 1");
    switch (params.method) {
        case MethodId::phate:
            if (p.k == 0) throw ValidationError("k must be positive");
            if (n < std::max<std::size_t>(3, p.k + 1)) {
                throw ValidationError("phate needs n >= max(3, k+1); got n=" + std::to_string(n) +
                                      ", k=" + std::to_string(p.k));
            }
            if (!(p.alpha >= 1.0)) throw ValidationError("alpha must be >= 1");
            if (p.t == 0) throw ValidationError("t must be at least 1");
            if (p.mds_max_iter == 0) throw ValidationError("mds_max_iter must be positive");
            if (!(p.mds_tol > 0.0)) throw ValidationError("mds_tol must be positive");
            if (!(p.log_floor > 0.0)) throw ValidationError("log_floor must be positive");
            break;
        case MethodId::pca:
            if (n < 2) throw ValidationError("pca needs at least 2 points");
            break;
        case MethodId::cmds:
            if (n < 3) throw ValidationError("cmds needs at least 3 points");
            break;
        case MethodId::spectral:
            if (params.spectral_k == 0) throw ValidationError("spectral k must be positive");
            if (n < std::max<std::size_t>(3, params.spectral_k + 1)) {
                throw ValidationError("spectral needs n >= max(3, k+1); got n=" + std::to_string(n) +
                                      ", k=" + std::to_string(params.spectral_k));
            }
            break;
    }
}

namespace {

json params_json(const ProjectionParams& params) {
    json j = {
        {"method", std::string(to_string(params.method))},
        {"out_dims", params.phate.out_dims},
        {"normalize_embeddings", params.normalize_embeddings},
    };
    if (params.method == MethodId::phate) {
        const auto& p = params.phate;
        j["k"] = p.k;
        j["alpha"] = p.alpha;
        j["t"] = p.t;
        j["seed"] = p.seed;
        j["mds_max_iter"] = p.mds_max_iter;
        j["mds_tol"] = p.mds_tol;
        j["log_floor"] = p.log_floor;
    } else if (params.method == MethodId::spectral) {
        j["k"] = params.spectral_k;
    }
    return j;
}

ProjectionParams params_from(const json& j) {
    ProjectionParams p;
    try {
        p.method = parse_method(j.at("method").get<std::string>());
        p.phate.out_dims = j.value("out_dims", p.phate.out_dims);
        p.normalize_embeddings = j.value("normalize_embeddings", false);
        if (p.method == MethodId::phate) {
            p.phate.k = j.value("k", p.phate.k);
            p.phate.alpha = j.value("alpha", p.phate.alpha);
            p.phate.t = j.value("t", p.phate.t);
            p.phate.seed = j.value("seed", p.phate.seed);
            p.phate.mds_max_iter = j.value("mds_max_iter", p.phate.mds_max_iter);
            p.phate.mds_tol = j.value("mds_tol", p.phate.mds_tol);
            p.phate.log_floor = j.value("log_floor", p.phate.log_floor);
        } else if (p.method == MethodId::spectral) {
            p.spectral_k = j.value("k", p.spectral_k);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid projection params: ") + e.what());
    }
    return p;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string params_to_json(const ProjectionParams& params) { return params_json(params).dump(); }

ProjectionParams params_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid projection params: ") + e.what());
    }
    return params_from(j);
}

std::string params_hash(const ProjectionParams& params) {
    return detail::sha256_hex(params_to_json(params)).substr(0, 12);
}

std::string coords_checksum(const Eigen::MatrixXd& coords) {
    return "sha256:" + detail::sha256_hex(coords.data(), static_cast<std::size_t>(coords.size()) * sizeof(double));
}

std::string current_timestamp() {
    std::time_t t = 0;
    const char* sde = std::getenv("SOURCE_DATE_EPOCH");
    if (sde && *sde) {
        t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Projection project(const AlignedData& input, const ProjectionParams& params) {
    validate(params, input.dataset.size());
    const AlignedData* data = &input;
    AlignedData normalized;
    if (params.normalize_embeddings) {
        normalized = input;
        normalize_rows(normalized);
        data = &normalized;
    }
    Projection out;
    switch (params.method) {
        case MethodId::phate: out = phate_project(*data, params.phate); break;
        case MethodId::pca: out = pca_project(*data, params.out_dims()); break;
        case MethodId::cmds: out = cmds_project(*data, params.out_dims()); break;
        case MethodId::spectral: out = spectral_project(*data, params.spectral_k, params.out_dims()); break;
    }
    out.params = params;
    return out;
}

void export_projection(const Projection& p, const fs::path& dir) {
    if (static_cast<std::size_t>(p.coords.rows()) != p.labels.size()) {
        throw ValidationError("projection has " + std::to_string(p.coords.rows()) + " rows but " +
                              std::to_string(p.labels.size()) + " labels");
    }
    fs::create_directories(dir);
    std::ostringstream csv;
    csv << "label";
    static const char* axis_names[] = {"x", "y", "z"};
    for (Eigen::Index c = 0; c < p.coords.cols(); ++c) {
        csv << ',' << (c < 3 ? std::string(axis_names[c]) : "c" + std::to_string(c + 1));
    }
    csv << '\n';
    for (Eigen::Index r = 0; r < p.coords.rows(); ++r) {
        csv << detail::quote_csv_field(p.labels[r]);
        for (Eigen::Index c = 0; c < p.coords.cols(); ++c) csv << ',' << format_double(p.coords(r, c));
        csv << '\n';
    }

    json manifest = {
        {"method", std::string(to_string(p.method))},
        {"params", params_json(p.params)},
        {"dataset_id", p.dataset_id},
        {"bundle_checksum", p.provenance.bundle_checksum},
        {"stress", p.stress},
        {"timestamp", p.provenance.timestamp},
        {"count", p.coords.rows()},
        {"out_dims", p.coords.cols()},
        {"warnings", p.warnings},
    };

    std::ofstream c(dir / "projection.csv", std::ios::binary | std::ios::trunc);
    if (!c) throw IoError("cannot write " + (dir / "projection.csv").string());
    c << csv.str();
    std::ofstream m(dir / "projection.manifest.json", std::ios::binary | std::ios::trunc);
    if (!m) throw IoError("cannot write " + (dir / "projection.manifest.json").string());
    m << manifest.dump(2) << '\n';
    if (!c || !m) throw IoError("write failed in " + dir.string());
}

Projection import_projection(const fs::path& dir) {
    std::ifstream min(dir / "projection.manifest.json", std::ios::binary);
    if (!min) throw IoError("cannot open " + (dir / "projection.manifest.json").string());
    json m;
    Projection p;
    std::size_t count = 0, dims = 0;
    try {
        m = json::parse(min);
        p.method = parse_method(m.at("method").get<std::string>());
        p.params = params_from(m.at("params"));
        p.dataset_id = m.at("dataset_id").get<std::string>();
        p.provenance.bundle_checksum = m.value("bundle_checksum", "");
        p.provenance.timestamp = m.value("timestamp", "");
        p.stress = m.at("stress").get<double>();
        p.warnings = m.value("warnings", std::vector<std::string>{});
        count = m.at("count").get<std::size_t>();
        dims = m.at("out_dims").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ValidationError("malformed projection manifest in " + dir.string() + ": " + e.what());
    }

    std::ifstream cin(dir / "projection.csv", std::ios::binary);
    if (!cin) throw IoError("cannot open " + (dir / "projection.csv").string());
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(cin, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t record_line = line_no;
        std::string more;
        while (detail::has_open_quote(line) && std::getline(cin, more)) {
            ++line_no;
            if (!more.empty() && more.back() == '\r') more.pop_back();
            line += '\n' + more;
        }
        auto fields = detail::split_csv_record(line, record_line);
        if (line_no == 1) {
            if (fields.empty() || fields[0] != "label" || fields.size() != dims + 1) {
                throw ParseError(line_no, "projection header does not match out_dims " + std::to_string(dims));
            }
            continue;
        }
        if (fields.size() != dims + 1) {
            throw ParseError(line_no, "expected " + std::to_string(dims + 1) + " fields");
        }
        p.labels.push_back(fields[0]);
        std::vector<double> row;
        for (std::size_t c = 1; c < fields.size(); ++c) {
            char* end = nullptr;
            const double v = std::strtod(fields[c].c_str(), &end);
            if (end == fields[c].c_str() || *end != '\0') {
                throw ParseError(line_no, "bad coordinate '" + fields[c] + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() != count) {
        throw ValidationError("projection.csv has " + std::to_string(rows.size()) + " rows, manifest says " +
                              std::to_string(count));
    }
    p.coords.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dims));
    for (std::size_t r = 0; r < count; ++r) {
        for (std::size_t c = 0; c < dims; ++c) p.coords(r, c) = rows[r][c];
    }
    return p;
}

}  // namespace semgeo
