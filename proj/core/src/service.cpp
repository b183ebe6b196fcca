#include "semgeo/service.hpp"

#include <condition_variable>
#include <deque>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "semgeo/comparison.hpp"
#include "semgeo/error.hpp"
#include "semgeo/projection.hpp"

namespace semgeo {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct HttpError : std::runtime_error {
    int status;
    std::string code;
    HttpError(int s, std::string c, const std::string& msg) : std::runtime_error(msg), status(s), code(std::move(c)) {}
};

Response error_response(int status, const std::string& code, const std::string& message) {
    return {status, json{{"code", code}, {"message", message}}.dump()};
}

json item_json(const LexicalItem& it) {
    return {
        {"label", it.label},
        {"gloss", it.gloss},
        {"language", it.language},
        {"category", it.category},
        {"item_class", std::string(to_string(it.item_class))},
        {"sequence_index", it.sequence_index ? json(*it.sequence_index) : json(nullptr)},
        {"network_root", it.network_root ? json(*it.network_root) : json(nullptr)},
    };
}

json summary_json(const Dataset& d) {
    return {{"id", d.id}, {"name", d.name}, {"item_count", d.size()}, {"domains", d.declared_domains}};
}

FilterSpec parse_filter(const json& j) {
    FilterSpec f = FilterSpec::all();
    if (j.is_null()) return f;
    if (!j.is_object()) throw HttpError(400, "bad_request", "filter must be an object");
    try {
        if (j.contains("include_classes") && !j.at("include_classes").is_null()) {
            f.include_classes.clear();
            for (const auto& c : j.at("include_classes")) f.include_classes.insert(parse_item_class(c.get<std::string>()));
            if (f.include_classes.empty()) throw HttpError(400, "bad_request", "filter include_classes is empty");
        }
        if (j.contains("include_categories") && !j.at("include_categories").is_null()) {
            f.include_categories = j.at("include_categories").get<std::set<std::string>>();
        }
        if (j.contains("include_languages") && !j.at("include_languages").is_null()) {
            f.include_languages = j.at("include_languages").get<std::set<std::string>>();
        }
    } catch (const json::exception& e) {
        throw HttpError(400, "bad_request", std::string("invalid filter: ") + e.what());
    } catch (const ValidationError& e) {
        throw HttpError(400, "bad_request", e.what());
    }
    return f;
}

json filter_json(const FilterSpec& f) {
    std::vector<std::string> classes;
    for (ItemClass c : f.include_classes) classes.emplace_back(to_string(c));
    return {
        {"include_classes", classes},
        {"include_categories", f.include_categories ? json(*f.include_categories) : json(nullptr)},
        {"include_languages", f.include_languages ? json(*f.include_languages) : json(nullptr)},
    };
}

ProjectionParams parse_params(const std::string& method, const json& params) {
    json p = params.is_null() ? json::object() : params;
    if (!p.is_object()) throw HttpError(400, "bad_request", "params must be an object");
    p["method"] = method;
    try {
        return params_from_json(p.dump());
    } catch (const ValidationError& e) {
        throw HttpError(400, "bad_request", e.what());
    }
}

json projection_result(const Projection& p, const Dataset& d, const MetricsReport& report) {
    json items = json::array();
    json coords = json::array();
    for (std::size_t i = 0; i < d.items.size(); ++i) {
        std::vector<double> row(p.coords.cols());
        for (Eigen::Index c = 0; c < p.coords.cols(); ++c) row[c] = p.coords(static_cast<Eigen::Index>(i), c);
        json it = item_json(d.items[i]);
        it["coords"] = row;
        items.push_back(std::move(it));
        coords.push_back(row);
    }
    return {
        {"method", std::string(to_string(p.method))},
        {"params", json::parse(params_to_json(p.params))},
        {"dataset_id", p.dataset_id},
        {"bundle_checksum", p.provenance.bundle_checksum},
        {"timestamp", p.provenance.timestamp},
        {"stress", p.stress},
        {"out_dims", p.coords.cols()},
        {"count", p.coords.rows()},
        {"warnings", p.warnings},
        {"coords", coords},
        {"items", items},
        {"metrics", json::parse(report_to_json(report))},
    };
}

std::string format_id(const char* prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%06zu", prefix, n);
    return buf;
}

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < path.size()) {
        while (i < path.size() && path[i] == '/') ++i;
        std::size_t j = path.find('/', i);
        if (j == std::string_view::npos) j = path.size();
        if (j > i) parts.emplace_back(path.substr(i, j - i));
        i = j;
    }
    return parts;
}

}  // namespace

struct Service::Impl {
    struct Job {
        std::string id;
        std::string status = "queued";
        bool cached = false;
        json request;
        std::string cache_key;
        json result;    // null until done
        json metrics;   // null until done
        std::string error;
    };
    struct Comparison {
        std::string id;
        std::string status = "queued";
        json request;
        json result;
        std::string error;
    };

    ServiceOptions options;
    std::map<std::string, Dataset> datasets;
    std::map<std::string, EmbeddingBundle> bundles;
    std::vector<std::string> load_errors;

    std::mutex mu;
    std::condition_variable cv;
    std::map<std::string, Job> jobs;
    std::map<std::string, Comparison> comparisons;
    std::map<std::string, std::string> cache;  // cache key -> done job id
    std::size_t next_job = 1;
    std::size_t next_cmp = 1;
    std::deque<std::function<void()>> queue;
    bool stopping = false;
    std::thread worker;

    httplib::Server server;
    std::thread server_thread;

    void run_worker() {
        for (;;) {
            std::function<void()> task;
            {
                std::unique_lock lock(mu);
                cv.wait(lock, [&] { return stopping || !queue.empty(); });
                if (queue.empty()) return;
                task = std::move(queue.front());
                queue.pop_front();
            }
            task();
        }
    }

    void enqueue(std::function<void()> task) {
        {
            std::lock_guard lock(mu);
            queue.push_back(std::move(task));
        }
        cv.notify_one();
    }

    void persist(const Job& job) {
        if (!options.persist_dir) return;
        try {
            fs::create_directories(*options.persist_dir);
            json doc = {{"job_id", job.id},   {"status", job.status},   {"cache_key", job.cache_key},
                        {"request", job.request}, {"result", job.result}, {"metrics", job.metrics}};
            std::ofstream out(*options.persist_dir / (job.id + ".json"), std::ios::binary | std::ios::trunc);
            out << doc.dump() << '\n';
        } catch (const std::exception& e) {
            std::cerr << "semgeo: could not persist job " << job.id << ": " << e.what() << '\n';
        }
    }

    void load_persisted() {
        if (!options.persist_dir || !fs::is_directory(*options.persist_dir)) return;
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(*options.persist_dir)) {
            if (e.path().extension() == ".json") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            try {
                std::ifstream in(f, std::ios::binary);
                const json doc = json::parse(in);
                Job job;
                job.id = doc.at("job_id").get<std::string>();
                job.status = "done";
                job.cache_key = doc.value("cache_key", "");
                job.request = doc.at("request");
                job.result = doc.at("result");
                job.metrics = doc.at("metrics");
                if (!job.cache_key.empty()) cache[job.cache_key] = job.id;
                const auto dash = job.id.rfind('-');
                if (dash != std::string::npos) {
                    next_job = std::max(next_job, std::stoul(job.id.substr(dash + 1)) + 1);
                }
                jobs[job.id] = std::move(job);
            } catch (const std::exception& e) {
                load_errors.push_back(f.string() + ": " + e.what());
            }
        }
    }

    // ---- routes -------------------------------------------------------

    Response list_datasets() {
        json out = json::array();
        for (const auto& [id, d] : datasets) out.push_back(summary_json(d));
        return {200, out.dump()};
    }

    Response get_dataset(const std::string& id) {
        auto it = datasets.find(id);
        if (it == datasets.end()) throw HttpError(404, "not_found", "unknown dataset '" + id + "'");
        json out = summary_json(it->second);
        json items = json::array();
        json counts = json::object();
        for (ItemClass c : kAllItemClasses) counts[std::string(to_string(c))] = 0;
        for (const auto& item : it->second.items) {
            items.push_back(item_json(item));
            counts[std::string(to_string(item.item_class))] = counts[std::string(to_string(item.item_class))].get<int>() + 1;
        }
        out["class_counts"] = counts;
        out["items"] = items;
        return {200, out.dump()};
    }

    Response list_bundles() {
        json out = json::array();
        for (const auto& [id, b] : bundles) {
            out.push_back({{"id", id}, {"model_id", b.model_id}, {"dim", b.dim()}, {"count", b.count()},
                           {"checksum", b.checksum}});
        }
        return {200, out.dump()};
    }

    struct Prepared {
        AlignedData data;
        ProjectionParams params;
        json request;
        std::string cache_key;
    };

    Prepared prepare(const json& req) {
        if (!req.is_object()) throw HttpError(400, "bad_request", "request body must be a JSON object");
        const std::string dataset_id = req.value("dataset_id", "");
        const std::string bundle_id = req.value("bundle_id", "");
        const std::string method = req.value("method", "phate");
        auto d = datasets.find(dataset_id);
        if (d == datasets.end()) throw HttpError(404, "not_found", "unknown dataset '" + dataset_id + "'");
        auto b = bundles.find(bundle_id);
        if (b == bundles.end()) throw HttpError(404, "not_found", "unknown bundle '" + bundle_id + "'");
        try {
            parse_method(method);
        } catch (const ValidationError& e) {
            throw HttpError(400, "bad_request", e.what());
        }
        const FilterSpec filter = parse_filter(req.contains("filter") ? req.at("filter") : json(nullptr));
        ProjectionParams params = parse_params(method, req.contains("params") ? req.at("params") : json(nullptr));

        Prepared p;
        try {
            const Dataset filtered = apply_filter(d->second, filter);
            p.data = align(filtered, b->second);
            validate(params, filtered.size());
        } catch (const Error& e) {
            throw HttpError(400, "bad_request", e.what());
        }
        p.params = params;
        p.request = {{"dataset_id", dataset_id},
                     {"bundle_id", bundle_id},
                     {"method", method},
                     {"params", json::parse(params_to_json(params))},
                     {"filter", filter_json(filter)}};
        p.cache_key = json{{"dataset", dataset_id},
                           {"bundle_checksum", b->second.checksum},
                           {"params", p.request.at("params")},
                           {"filter", p.request.at("filter")}}
                          .dump();
        return p;
    }

    Response create_projection(std::string_view body) {
        json req;
        try {
            req = json::parse(body);
        } catch (const json::exception& e) {
            throw HttpError(400, "bad_request", std::string("invalid JSON: ") + e.what());
        }
        Prepared prep = prepare(req);

        std::string id;
        {
            std::lock_guard lock(mu);
            id = format_id("job", next_job++);
            Job job;
            job.id = id;
            job.request = prep.request;
            job.cache_key = prep.cache_key;
            auto hit = cache.find(prep.cache_key);
            if (hit != cache.end()) {
                const Job& src = jobs.at(hit->second);
                job.status = "done";
                job.cached = true;
                job.result = src.result;
                job.metrics = src.metrics;
                jobs[id] = std::move(job);
                return {202, json{{"job_id", id}, {"status", "done"}}.dump()};
            }
            jobs[id] = std::move(job);
        }
        auto shared = std::make_shared<Prepared>(std::move(prep));
        enqueue([this, id, shared] { run_projection(id, *shared); });
        return {202, json{{"job_id", id}, {"status", "queued"}}.dump()};
    }

    void run_projection(const std::string& id, const Prepared& prep) {
        {
            std::lock_guard lock(mu);
            jobs.at(id).status = "running";
        }
        json result, metrics;
        std::string error;
        try {
            if (options.job_gate) options.job_gate(id);
            const Projection p = project(prep.data, prep.params);
            const MetricsReport report = full_report(prep.data, p, options.metrics);
            result = projection_result(p, prep.data.dataset, report);
            metrics = result.at("metrics");
        } catch (const std::exception& e) {
            error = e.what();
        }
        std::lock_guard lock(mu);
        Job& job = jobs.at(id);
        if (error.empty()) {
            job.result = std::move(result);
            job.metrics = std::move(metrics);
            job.status = "done";
            cache.emplace(job.cache_key, id);
            persist(job);
        } else {
            job.error = error;
            job.status = "failed";
        }
    }

    Response get_projection(const std::string& id, bool metrics_only) {
        std::lock_guard lock(mu);
        auto it = jobs.find(id);
        if (it == jobs.end()) throw HttpError(404, "not_found", "unknown projection job '" + id + "'");
        const Job& job = it->second;
        if (metrics_only) {
            if (job.status == "failed") throw HttpError(409, "job_failed", job.error);
            if (job.status != "done") throw HttpError(409, "not_ready", "job " + id + " is " + job.status);
            return {200, job.metrics.dump()};
        }
        json out = {{"job_id", job.id}, {"status", job.status}, {"cached", job.cached}, {"request", job.request}};
        if (job.status == "done") out["result"] = job.result;
        if (job.status == "failed") out["error"] = job.error;
        return {200, out.dump()};
    }

    Response create_comparison(std::string_view body) {
        json req;
        try {
            req = json::parse(body);
        } catch (const json::exception& e) {
            throw HttpError(400, "bad_request", std::string("invalid JSON: ") + e.what());
        }
        if (!req.is_object()) throw HttpError(400, "bad_request", "request body must be a JSON object");
        const json targets = req.value("datasets", json::array());
        const json methods_in = req.value("methods", json::array({"phate", "pca", "cmds", "spectral"}));
        const json grid_in = req.value("param_grid", json::array({json::object()}));
        if (targets.empty() || methods_in.empty() || grid_in.empty()) {
            throw HttpError(400, "bad_request", "comparison grid is empty");
        }
        const FilterSpec filter = parse_filter(req.contains("filter") ? req.at("filter") : json(nullptr));

        auto inputs = std::make_shared<std::vector<AlignedData>>();
        std::vector<MethodId> methods;
        std::vector<ProjectionParams> grid;
        try {
            for (const auto& m : methods_in) methods.push_back(parse_method(m.get<std::string>()));
            for (const auto& t : targets) {
                const std::string dataset_id = t.value("dataset_id", "");
                const std::string bundle_id = t.value("bundle_id", "");
                auto d = datasets.find(dataset_id);
                if (d == datasets.end()) throw HttpError(404, "not_found", "unknown dataset '" + dataset_id + "'");
                auto b = bundles.find(bundle_id);
                if (b == bundles.end()) throw HttpError(404, "not_found", "unknown bundle '" + bundle_id + "'");
                inputs->push_back(align(apply_filter(d->second, filter), b->second));
            }
            for (const auto& g : grid_in) grid.push_back(parse_params("phate", g));
        } catch (const json::exception& e) {
            throw HttpError(400, "bad_request", e.what());
        } catch (const Error& e) {
            throw HttpError(400, "bad_request", e.what());
        }

        std::string id;
        {
            std::lock_guard lock(mu);
            id = format_id("cmp", next_cmp++);
            comparisons[id] = Comparison{id, "queued", req, nullptr, {}};
        }
        enqueue([this, id, inputs, methods, grid] {
            {
                std::lock_guard lock(mu);
                comparisons.at(id).status = "running";
            }
            json result;
            std::string error;
            try {
                const auto cells = run_matrix(*inputs, methods, grid, options.metrics);
                json cj = json::array();
                for (const auto& c : cells) {
                    const MetricsReport r = c.report.value_or(MetricsReport{});
                    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
                    cj.push_back({{"dataset", c.dataset_id},
                                  {"method", std::string(to_string(c.method))},
                                  {"params_hash", c.params_hash},
                                  {"params", json::parse(params_to_json(c.params))},
                                  {"silhouette", opt(r.silhouette)},
                                  {"branch_linearity", opt(r.linearity_score)},
                                  {"global_preservation", opt(r.global_preservation)},
                                  {"status", c.status},
                                  {"wall_time_ms", c.wall_time_ms}});
                }
                json ranking = json::array();
                for (const auto& s : rank_methods(cells)) {
                    ranking.push_back({{"method", std::string(to_string(s.method))}, {"score", s.score}});
                }
                result = {{"cells", cj}, {"ranking", ranking}};
            } catch (const std::exception& e) {
                error = e.what();
            }
            std::lock_guard lock(mu);
            auto& cmp = comparisons.at(id);
            if (error.empty()) {
                cmp.result = std::move(result);
                cmp.status = "done";
            } else {
                cmp.error = error;
                cmp.status = "failed";
            }
        });
        return {202, json{{"compare_id", id}, {"status", "queued"}}.dump()};
    }

    Response get_comparison(const std::string& id) {
        std::lock_guard lock(mu);
        auto it = comparisons.find(id);
        if (it == comparisons.end()) throw HttpError(404, "not_found", "unknown comparison '" + id + "'");
        const auto& c = it->second;
        json out = {{"compare_id", c.id}, {"status", c.status}, {"request", c.request}};
        if (c.status == "done") out["result"] = c.result;
        if (c.status == "failed") out["error"] = c.error;
        return {200, out.dump()};
    }

    Response route(std::string_view method, std::string_view path, std::string_view body) {
        const auto qpos = path.find('?');
        if (qpos != std::string_view::npos) path = path.substr(0, qpos);
        const auto parts = split_path(path);
        if (parts.empty() || parts[0] != "api") throw HttpError(404, "not_found", "no route for " + std::string(path));
        const bool get = method == "GET", post = method == "POST";
        const std::size_t n = parts.size();
        if (n >= 2 && parts[1] == "datasets") {
            if (n == 2 && get) return list_datasets();
            if (n == 3 && get) return get_dataset(parts[2]);
        } else if (n == 2 && parts[1] == "bundles") {
            if (get) return list_bundles();
        } else if (n >= 2 && parts[1] == "projections") {
            if (n == 2 && post) return create_projection(body);
            if (n == 3 && get) return get_projection(parts[2], false);
            if (n == 4 && get && parts[3] == "metrics") return get_projection(parts[2], true);
        } else if (n >= 2 && parts[1] == "compare") {
            if (n == 2 && post) return create_comparison(body);
            if (n == 3 && get) return get_comparison(parts[2]);
        } else {
            throw HttpError(404, "not_found", "no route for " + std::string(path));
        }
        throw HttpError(405, "method_not_allowed", std::string(method) + " not allowed on " + std::string(path));
    }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
    impl_->options = std::move(options);
    auto& o = impl_->options;
    auto scan = [](const fs::path& dir, std::string_view suffix) {
        std::vector<fs::path> files;
        if (!fs::is_directory(dir)) return files;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_regular_file() && e.path().filename().string().ends_with(suffix)) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        return files;
    };
    if (o.data_dir) {
        if (!fs::is_directory(*o.data_dir)) impl_->load_errors.push_back("data dir " + o.data_dir->string() + " not found");
        for (const auto& f : scan(*o.data_dir, ".csv")) {
            try {
                add_dataset(load_dataset(f));
            } catch (const std::exception& e) {
                impl_->load_errors.push_back(f.string() + ": " + e.what());
            }
        }
    }
    if (o.bundle_dir) {
        for (const auto& f : scan(*o.bundle_dir, ".manifest.json")) {
            try {
                const auto prefix = bundle_prefix(f);
                add_bundle(prefix.filename().string(), read_bundle(prefix));
            } catch (const std::exception& e) {
                impl_->load_errors.push_back(f.string() + ": " + e.what());
            }
        }
    }
    impl_->load_persisted();
    impl_->worker = std::thread([this] { impl_->run_worker(); });
}

Service::~Service() {
    stop();
    {
        std::lock_guard lock(impl_->mu);
        impl_->stopping = true;
        impl_->queue.clear();
    }
    impl_->cv.notify_all();
    if (impl_->worker.joinable()) impl_->worker.join();
}

void Service::add_dataset(Dataset dataset) {
    if (impl_->options.synthetic_bundles) {
        add_bundle(dataset.id + "-synthetic", synthetic_bundle(dataset, 32, 0));
    }
    const std::string id = dataset.id;
    impl_->datasets.insert_or_assign(id, std::move(dataset));
}

void Service::add_bundle(std::string id, EmbeddingBundle bundle) {
    impl_->bundles.insert_or_assign(std::move(id), std::move(bundle));
}

const std::vector<std::string>& Service::load_errors() const { return impl_->load_errors; }

Response Service::handle(std::string_view method, std::string_view path, std::string_view body) {
    try {
        return impl_->route(method, path, body);
    } catch (const HttpError& e) {
        return error_response(e.status, e.code, e.what());
    } catch (const std::exception& e) {
        return error_response(500, "internal", e.what());
    }
}

void Service::bind_routes() {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        const Response r = handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    auto& srv = impl_->server;
    srv.Get(R"(/api/.*)", forward);
    srv.Post(R"(/api/.*)", forward);
    srv.Put(R"(/api/.*)", forward);
    srv.Delete(R"(/api/.*)", forward);
    if (impl_->options.static_dir) srv.set_mount_point("/", impl_->options.static_dir->string());
}

bool Service::listen(const std::string& host, int port) {
    auto& srv = impl_->server;
    bind_routes();
    if (port == 0) {
        const int bound = srv.bind_to_any_port(host);
        if (bound < 0) return false;
        return srv.listen_after_bind();
    }
    return srv.listen(host, port);
}

int Service::listen_in_background(const std::string& host) {
    auto& srv = impl_->server;
    bind_routes();
    const int port = srv.bind_to_any_port(host);
    if (port < 0) throw IoError("could not bind a port on " + host);
    impl_->server_thread = std::thread([&srv] { srv.listen_after_bind(); });
    srv.wait_until_ready();
    return port;
}

void Service::stop() {
    impl_->server.stop();
    if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

}  // namespace semgeo
