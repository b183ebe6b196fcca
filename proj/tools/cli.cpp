#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "semgeo/comparison.hpp"
#include "semgeo/dataset.hpp"
#include "semgeo/embedding.hpp"
#include "semgeo/error.hpp"
#include "semgeo/metrics.hpp"
#include "semgeo/phate.hpp"
#include "semgeo/plot.hpp"
#include "semgeo/projection.hpp"
#include "semgeo/service.hpp"

namespace semgeo::cli {
namespace fs = std::filesystem;

namespace {

struct InputOptions {
    std::string dataset;
    std::string bundle;
    bool synthetic = false;
    std::size_t dim = 32;
    std::uint64_t seed = 0;
    bool normalize = false;
    std::vector<std::string> classes;
    std::vector<std::string> categories;
    std::vector<std::string> languages;
};

struct ParamOptions {
    std::string method = "phate";
    std::size_t k = 10;
    double alpha = 10.0;
    std::size_t t = 20;
    std::size_t out_dims = 2;
    std::size_t mds_max_iter = 500;
    double mds_tol = 1e-6;
    double log_floor = 1e-7;
    std::optional<std::size_t> spectral_k;
};

struct MetricOptions {
    double radius_fraction = 1.0;
    std::string graph_mode = "epsilon";
    std::size_t graph_k = 10;
    std::size_t grid_resolution = 50;
    double radius_multiplier = 2.0;
    std::size_t coherence_k = 10;
    std::size_t chi_cells = 2;
    std::string metric_space = "projection";
};

void add_filter_flags(CLI::App* cmd, InputOptions& in) {
    cmd->add_option("--classes", in.classes, "Item classes to keep (comma separated)")->delimiter(',');
    cmd->add_option("--categories", in.categories, "Categories to keep (comma separated)")->delimiter(',');
    cmd->add_option("--languages", in.languages, "Language tags to keep (comma separated)")->delimiter(',');
}

void add_bundle_flags(CLI::App* cmd, InputOptions& in) {
    cmd->add_option("--bundle", in.bundle, "Embedding bundle (prefix, manifest or .f32 path)");
    cmd->add_flag("--synthetic", in.synthetic, "Use deterministic synthetic embeddings instead of a bundle");
    cmd->add_option("--dim", in.dim, "Dimension of synthetic embeddings")->capture_default_str();
    cmd->add_option("--seed", in.seed, "Seed for synthetic embeddings and the projection record")->capture_default_str();
    cmd->add_flag("--normalize-embeddings", in.normalize, "Scale embedding rows to unit length first");
}

void add_param_flags(CLI::App* cmd, ParamOptions& p) {
    cmd->add_option("--k", p.k, "k nearest neighbours")->capture_default_str();
    cmd->add_option("--alpha", p.alpha, "alpha-decay exponent")->capture_default_str();
    cmd->add_option("--t", p.t, "diffusion time")->capture_default_str();
    cmd->add_option("--out-dims", p.out_dims, "output dimensions")->capture_default_str();
    cmd->add_option("--mds-max-iter", p.mds_max_iter, "SMACOF iteration cap")->capture_default_str();
    cmd->add_option("--mds-tol", p.mds_tol, "SMACOF relative stress tolerance")->capture_default_str();
    cmd->add_option("--log-floor", p.log_floor, "floor added inside the potential logarithm")->capture_default_str();
    cmd->add_option("--spectral-k", p.spectral_k, "k for the spectral kNN graph (defaults to --k)");
}

void add_metric_flags(CLI::App* cmd, MetricOptions& m) {
    cmd->add_option("--radius-fraction", m.radius_fraction, "epsilon-graph radius as a fraction of the max distance")
        ->capture_default_str();
    cmd->add_option("--graph-mode", m.graph_mode, "epsilon or knn")
        ->check(CLI::IsMember({"epsilon", "knn"}))
        ->capture_default_str();
    cmd->add_option("--graph-k", m.graph_k, "k for --graph-mode knn")->capture_default_str();
    cmd->add_option("--grid-resolution", m.grid_resolution, "void-analysis grid cells per axis")->capture_default_str();
    cmd->add_option("--radius-multiplier", m.radius_multiplier, "void threshold in median 1-NN distances")
        ->capture_default_str();
    cmd->add_option("--coherence-k", m.coherence_k, "neighbours for language coherence")->capture_default_str();
    cmd->add_option("--chi-cells", m.chi_cells, "chi-square grid cells per axis")->capture_default_str();
    cmd->add_option("--metric-space", m.metric_space, "where silhouette/Davies-Bouldin are computed")
        ->check(CLI::IsMember({"projection", "embedding"}))
        ->capture_default_str();
}

MetricsConfig metrics_config(const MetricOptions& m) {
    MetricsConfig c;
    c.radius_fraction = m.radius_fraction;
    c.graph_mode = m.graph_mode == "knn" ? GraphMode::knn : GraphMode::epsilon;
    c.graph_k = m.graph_k;
    c.grid_resolution = m.grid_resolution;
    c.radius_multiplier = m.radius_multiplier;
    c.coherence_k = m.coherence_k;
    c.chi_cells = m.chi_cells;
    c.cluster_metrics_on_embeddings = m.metric_space == "embedding";
    return c;
}

ProjectionParams projection_params(const ParamOptions& p, const InputOptions& in) {
    ProjectionParams pp;
    pp.method = parse_method(p.method);
    pp.phate.k = p.k;
    pp.phate.alpha = p.alpha;
    pp.phate.t = p.t;
    pp.phate.out_dims = p.out_dims;
    pp.phate.seed = in.seed;
    pp.phate.mds_max_iter = p.mds_max_iter;
    pp.phate.mds_tol = p.mds_tol;
    pp.phate.log_floor = p.log_floor;
    pp.spectral_k = p.spectral_k.value_or(p.k);
    pp.normalize_embeddings = in.normalize;
    return pp;
}

FilterSpec filter_spec(const InputOptions& in) {
    FilterSpec f = FilterSpec::all();
    if (!in.classes.empty()) {
        f.include_classes.clear();
        for (const auto& c : in.classes) f.include_classes.insert(parse_item_class(c));
    }
    if (!in.categories.empty()) f.include_categories = std::set<std::string>(in.categories.begin(), in.categories.end());
    if (!in.languages.empty()) f.include_languages = std::set<std::string>(in.languages.begin(), in.languages.end());
    return f;
}

bool has_filter(const InputOptions& in) {
    return !in.classes.empty() || !in.categories.empty() || !in.languages.empty();
}

fs::path resolve_bundle(const std::string& name) {
    const auto prefix = bundle_prefix(name);
    if (fs::exists(prefix.string() + ".manifest.json")) return prefix;
    if (const char* dir = std::getenv("SEMGEO_BUNDLE_DIR"); dir && *dir) {
        const auto p = fs::path(dir) / prefix;
        if (fs::exists(p.string() + ".manifest.json")) return p;
    }
    throw IoError("bundle '" + name + "' not found (expected " + prefix.string() + ".manifest.json)");
}

struct Loaded {
    Dataset full;
    Dataset selected;
    std::optional<EmbeddingBundle> bundle;
};

Loaded load_inputs(const InputOptions& in, bool bundle_required) {
    Loaded l;
    l.full = load_dataset(resolve_dataset_path(in.dataset));
    l.selected = has_filter(in) ? apply_filter(l.full, filter_spec(in)) : l.full;
    if (in.synthetic && !in.bundle.empty()) throw ValidationError("--synthetic and --bundle are mutually exclusive");
    if (in.synthetic) {
        l.bundle = synthetic_bundle(l.full, in.dim, in.seed);
    } else if (!in.bundle.empty()) {
        l.bundle = read_bundle(resolve_bundle(in.bundle));
    } else if (bundle_required) {
        throw ValidationError("an embedding source is required: pass --bundle or --synthetic");
    }
    return l;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
    for (const auto& w : warnings) err << "warning: " << w << '\n';
}

// Dataset restricted and reordered to the projection's rows.
Dataset dataset_for_projection(const Dataset& ds, const Projection& p) {
    std::map<std::string, const LexicalItem*> by_label;
    for (const auto& it : ds.items) by_label.emplace(it.label, &it);
    Dataset out;
    out.id = ds.id;
    out.name = ds.name;
    out.declared_domains = ds.declared_domains;
    std::vector<std::string> missing;
    for (const auto& l : p.labels) {
        auto f = by_label.find(l);
        if (f == by_label.end()) {
            missing.push_back(l);
        } else {
            out.items.push_back(*f->second);
        }
    }
    if (!missing.empty()) {
        std::string msg = "projection labels missing from dataset " + ds.id + ":";
        for (const auto& m : missing) msg += " " + m;
        throw NotFoundError(msg);
    }
    return out;
}

// ---- subcommands ------------------------------------------------------

int run_ingest(const InputOptions& in, const std::string& out_prefix, const std::string& model_id, std::ostream& out) {
    Loaded l = load_inputs(in, true);
    AlignedData a = align(l.selected, *l.bundle);
    if (in.normalize) normalize_rows(a);
    FloatMatrix m = a.matrix.cast<float>();
    const std::string model = model_id.empty() ? l.bundle->model_id : model_id;
    const EmbeddingBundle b = make_bundle(model, a.dataset.labels(), std::move(m));
    write_bundle(b, out_prefix);
    out << "dataset " << a.dataset.id << ": " << b.count() << " items x " << b.dim() << " dims -> "
        << bundle_prefix(out_prefix).string() << ".manifest.json (" << b.checksum << ")\n";
    return kOk;
}

int run_project(const InputOptions& in, const ParamOptions& po, const std::string& out_dir,
                const std::vector<std::size_t>& select_t, std::ostream& out, std::ostream& err) {
    ProjectionParams params = projection_params(po, in);
    Loaded l = load_inputs(in, true);
    AlignedData a = align(l.selected, *l.bundle);
    if (!select_t.empty()) {
        if (params.method != MethodId::phate) throw ValidationError("--select-t only applies to --method phate");
        validate(params, a.dataset.size());
        AlignedData input = a;
        if (params.normalize_embeddings) normalize_rows(input);
        const auto op = build_operator(input.matrix, params.phate);
        params.phate.t = select_t_entropy(op, select_t);
        out << "selected t=" << params.phate.t << '\n';
    }
    const Projection p = project(a, params);
    print_warnings(p.warnings, err);
    export_projection(p, out_dir);
    out << "wrote " << (fs::path(out_dir) / "projection.csv").string() << " (" << p.size() << " items, "
        << to_string(p.method) << ", stress " << p.stress << ")\n";
    return kOk;
}

int run_metrics(const InputOptions& in, const MetricOptions& mo, const std::string& proj_dir, const std::string& out_dir,
                std::ostream& out, std::ostream& err) {
    const Projection p = import_projection(proj_dir);
    Loaded l = load_inputs(in, false);
    const Dataset ds = dataset_for_projection(l.full, p);
    AlignedData a;
    if (l.bundle) {
        a = align(ds, *l.bundle);
        if (p.params.normalize_embeddings) normalize_rows(a);
    } else {
        a = align_matrix(ds, Eigen::MatrixXd(static_cast<Eigen::Index>(ds.size()), 0));
    }
    const MetricsReport r = full_report(a, p, metrics_config(mo));
    print_warnings(r.warnings, err);
    export_report(r, out_dir.empty() ? fs::path(proj_dir) : fs::path(out_dir));
    out << format_report_text(r);
    return kOk;
}

int run_compare(const std::vector<std::string>& dataset_names, const std::vector<std::string>& bundle_names,
                InputOptions in, const ParamOptions& po, const MetricOptions& mo, const std::vector<std::string>& methods,
                const std::vector<std::size_t>& grid_t, const std::vector<std::size_t>& grid_k, const std::string& out_dir,
                std::ostream& out) {
    if (!in.synthetic && bundle_names.size() != dataset_names.size()) {
        throw ValidationError("pass one --bundle per --dataset, or --synthetic");
    }
    std::vector<AlignedData> inputs;
    for (std::size_t i = 0; i < dataset_names.size(); ++i) {
        in.dataset = dataset_names[i];
        in.bundle = in.synthetic ? std::string() : bundle_names[i];
        Loaded l = load_inputs(in, true);
        inputs.push_back(align(l.selected, *l.bundle));
    }
    std::vector<MethodId> ms;
    for (const auto& m : methods) ms.push_back(parse_method(m));
    if (ms.empty()) ms.assign(std::begin(kAllMethods), std::end(kAllMethods));

    std::vector<ProjectionParams> grid;
    const ProjectionParams base = projection_params(po, in);
    const std::vector<std::size_t> ts = grid_t.empty() ? std::vector<std::size_t>{base.phate.t} : grid_t;
    const std::vector<std::size_t> ks = grid_k.empty() ? std::vector<std::size_t>{base.phate.k} : grid_k;
    for (std::size_t k : ks) {
        for (std::size_t t : ts) {
            ProjectionParams p = base;
            p.phate.k = k;
            p.spectral_k = po.spectral_k.value_or(k);
            p.phate.t = t;
            grid.push_back(p);
        }
    }
    const auto cells = run_matrix(inputs, ms, grid, metrics_config(mo));
    export_comparison(cells, out_dir);
    std::size_t rank = 1;
    for (const auto& s : rank_methods(cells)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", s.score);
        out << rank++ << ' ' << to_string(s.method) << ' ' << buf << '\n';
    }
    for (const auto& c : cells) {
        if (!c.ok()) out << "cell " << c.dataset_id << '/' << to_string(c.method) << '/' << c.params_hash << ' ' << c.status << '\n';
    }
    return kOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Semantic geometry toolkit: PHATE and baseline projections with geometric metrics", "semgeo"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    InputOptions in;
    ParamOptions po;
    MetricOptions mo;
    std::string out_path, projection_dir, model_id, title;
    std::vector<std::size_t> select_t, grid_t, grid_k;
    std::vector<std::string> methods, datasets, bundles;
    bool no_labels = false;

    auto* ingest = app.add_subcommand("ingest", "Validate a dataset against a bundle and write the aligned bundle");
    ingest->add_option("--dataset", in.dataset, "Dataset CSV path or shipped dataset name")->required();
    add_bundle_flags(ingest, in);
    add_filter_flags(ingest, in);
    ingest->add_option("--out", out_path, "Output bundle prefix")->required();
    ingest->add_option("--model-id", model_id, "model_id recorded in the manifest");

    auto* proj = app.add_subcommand("project", "Project a dataset with one method");
    proj->add_option("--dataset", in.dataset, "Dataset CSV path or shipped dataset name")->required();
    add_bundle_flags(proj, in);
    add_filter_flags(proj, in);
    proj->add_option("--method", po.method, "phate, pca, cmds or spectral")->capture_default_str();
    add_param_flags(proj, po);
    proj->add_option("--select-t", select_t, "Pick t at the entropy knee among these candidates")->delimiter(',');
    proj->add_option("--out", out_path, "Output directory")->required();

    auto* met = app.add_subcommand("metrics", "Compute the metric battery for an exported projection");
    met->add_option("--projection", projection_dir, "Projection directory")->required();
    met->add_option("--dataset", in.dataset, "Dataset CSV path or shipped dataset name")->required();
    add_bundle_flags(met, in);
    add_metric_flags(met, mo);
    met->add_option("--out", out_path, "Report directory (defaults to the projection directory)");

    auto* cmp = app.add_subcommand("compare", "Run the dataset x method x parameter grid and rank methods");
    cmp->add_option("--dataset", datasets, "Dataset (repeatable)")->required();
    cmp->add_option("--bundle", bundles, "Bundle for each --dataset, in order (repeatable)");
    cmp->add_flag("--synthetic", in.synthetic, "Use synthetic embeddings for every dataset");
    cmp->add_option("--dim", in.dim, "Dimension of synthetic embeddings")->capture_default_str();
    cmp->add_option("--seed", in.seed, "Seed for synthetic embeddings")->capture_default_str();
    cmp->add_flag("--normalize-embeddings", in.normalize, "Scale embedding rows to unit length first");
    add_filter_flags(cmp, in);
    cmp->add_option("--methods", methods, "Methods to run (comma separated; default all)")->delimiter(',');
    add_param_flags(cmp, po);
    cmp->add_option("--grid-t", grid_t, "Diffusion times to sweep")->delimiter(',');
    cmp->add_option("--grid-k", grid_k, "Neighbour counts to sweep")->delimiter(',');
    add_metric_flags(cmp, mo);
    cmp->add_option("--out", out_path, "Output directory")->required();

    auto* plt = app.add_subcommand("plot", "Render a 2D projection as SVG");
    plt->add_option("--projection", projection_dir, "Projection directory")->required();
    plt->add_option("--dataset", in.dataset, "Dataset CSV path or shipped dataset name")->required();
    plt->add_option("--out", out_path, "Output .svg file")->required();
    plt->add_option("--title", title, "Plot title");
    plt->add_flag("--no-labels", no_labels, "Omit text labels");

    std::string host = "127.0.0.1", data_dir, bundle_dir, static_dir, persist_dir;
    int port = 8080;
    bool synthetic_bundles = false;
    auto* srv = app.add_subcommand("serve", "Serve the HTTP API (and optionally the explorer assets)");
    srv->add_option("--data-dir", data_dir, "Dataset directory (default: shipped datasets)");
    srv->add_option("--bundle-dir", bundle_dir, "Directory of *.manifest.json bundles");
    srv->add_option("--host", host, "Bind address")->capture_default_str();
    srv->add_option("--port", port, "Port (0 picks a free one)")->capture_default_str();
    srv->add_option("--static-dir", static_dir, "Static assets mounted at /");
    srv->add_option("--persist-dir", persist_dir, "Directory for finished jobs");
    srv->add_flag("--synthetic-bundles", synthetic_bundles, "Register a synthetic bundle for every dataset");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*proj) parse_method(po.method);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*ingest) return run_ingest(in, out_path, model_id, out);
        if (*proj) return run_project(in, po, out_path, select_t, out, err);
        if (*met) return run_metrics(in, mo, projection_dir, out_path, out, err);
        if (*cmp) return run_compare(datasets, bundles, in, po, mo, methods, grid_t, grid_k, out_path, out);
        if (*plt) {
            const Projection p = import_projection(projection_dir);
            const Dataset ds = load_dataset(resolve_dataset_path(in.dataset));
            PlotOptions opt;
            opt.show_labels = !no_labels;
            opt.title = title;
            plot(p, ds, out_path, opt);
            out << "wrote " << out_path << '\n';
            return kOk;
        }
        if (*srv) {
            ServiceOptions so;
            so.data_dir = data_dir.empty() ? default_data_dir() : fs::path(data_dir);
            if (!bundle_dir.empty()) so.bundle_dir = bundle_dir;
            if (!static_dir.empty()) so.static_dir = static_dir;
            if (!persist_dir.empty()) so.persist_dir = persist_dir;
            so.synthetic_bundles = synthetic_bundles;
            Service service(so);
            for (const auto& e : service.load_errors()) err << "warning: " << e << '\n';
            out << "listening on http://" << host << ':' << port << std::endl;
            if (!service.listen(host, port)) {
                err << "error: could not bind " << host << ':' << port << '\n';
                return kDataError;
            }
            return kOk;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsage;
}

}  // namespace semgeo::cli
