#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semgeo/dataset.hpp"
#include "semgeo/embedding.hpp"
#include "semgeo/metrics.hpp"

namespace semgeo {

struct ServiceOptions {
    std::optional<std::filesystem::path> data_dir;     // every *.csv becomes a dataset
    std::optional<std::filesystem::path> bundle_dir;   // every *.manifest.json becomes a bundle
    std::optional<std::filesystem::path> persist_dir;  // done jobs are written here and reloaded
    std::optional<std::filesystem::path> static_dir;   // mounted at / by listen()
    // Registers "<dataset>-synthetic" (dim 32, seed 0) for every dataset.
    bool synthetic_bundles = false;
    MetricsConfig metrics;
    // Called on the worker thread after a job turns running and before any
    // work happens. Tests use it to hold a job in the running state; an
    // exception thrown from it fails the job.
    std::function<void(const std::string& job_id)> job_gate;
};

struct Response {
    int status = 200;
    std::string body;  // JSON
};

/// Job store plus the HTTP routes of the explorer API. Datasets and bundles
/// must be registered before requests are served; after that only the job
/// store changes.
class Service {
public:
    explicit Service(ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    void add_dataset(Dataset dataset);
    void add_bundle(std::string id, EmbeddingBundle bundle);
    /// Problems met while scanning data_dir / bundle_dir / persist_dir.
    const std::vector<std::string>& load_errors() const;

    Response handle(std::string_view method, std::string_view path, std::string_view body = {});

    /// Serves HTTP until stop() is called. Returns false if the socket could
    /// not be bound.
    bool listen(const std::string& host, int port);
    /// Binds to a free port and serves on a background thread; returns the port.
    int listen_in_background(const std::string& host = "127.0.0.1");
    void stop();

private:
    void bind_routes();

    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace semgeo
