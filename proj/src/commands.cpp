#include "cne/cli/commands.hpp"
#include "cne/cli/svg.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

namespace cne::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::ofstream open_output(const fs::path& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    return out;
}

json optional_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

}

void write_embedding_csv(const Dataset<double>& data, const Matrix<double>& coords, std::ostream& out) {
    out << "id";
    for (Index c = 0; c < coords.cols(); ++c) {
        out << ",z" << (c + 1);
    }
    if (data.labels) {
        out << ",label";
    }
    out << '\n';
    for (Index r = 0; r < coords.rows(); ++r) {
        const auto ur = static_cast<std::size_t>(r);
        out << (ur < data.ids.size() ? data.ids[ur] : std::to_string(r));
        for (Index c = 0; c < coords.cols(); ++c) {
            out << ',' << format_real(coords(r, c));
        }
        if (data.labels) {
            out << ',' << (*data.labels)[ur];
        }
        out << '\n';
    }
}

std::string quality_json(const QualityReport& q) {
    json j;
    j["knn_recall"] = optional_json(q.knn_recall);
    j["knn_accuracy"] = optional_json(q.knn_accuracy);
    j["silhouette"] = optional_json(q.silhouette);
    j["k_recall"] = q.k_recall;
    j["k_accuracy"] = q.k_accuracy;
    return j.dump(2) + "\n";
}

void write_training_log(const TrainingLog& log, std::ostream& out) {
    for (const auto& rec : log) {
        json j;
        j["epoch"] = rec.epoch;
        j["mean_loss"] = rec.mean_loss;
        j["wall_ms"] = rec.wall_ms;
        j["w_u"] = rec.w_u;
        out << j.dump() << '\n';
    }
}

/*****************************
 *** embed *******************
 *****************************/

namespace {

/**
 * Reject configurations that cannot work on this dataset before any
 * training starts.
 */
void check_run(const RunConfig& config, const Dataset<double>& data) {
    const auto name = std::string(loss_name(config.loss.kind));
    if (config.loss.supervised() && !data.labels) {
        throw UsageError("loss '" + name + "' needs labels; pass --label-column or use a labeled generator");
    }
    try {
        check_dataset(data, config.loss.supervised());
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (config.k >= data.size()) {
        throw UsageError("k = " + std::to_string(config.k) + " needs more than " + std::to_string(data.size()) +
                         " samples");
    }
    if (config.optim.dim >= data.dim()) {
        throw UsageError("embedding dimension " + std::to_string(config.optim.dim) +
                         " must be smaller than the input dimension " + std::to_string(data.dim()));
    }
}

}

EmbedResult run_embed(RunConfig config) {
    canonicalize_source(config);
    const auto data = load_data(config);
    check_run(config, data);

    const fs::path dir(config.out);
    fs::create_directories(dir);
    open_output(dir / "config.ini") << to_ini(config);

    const auto graph = knn_graph(data.points, config.k);
    EmbedResult result;
    Embedding<double> emb;
    if (config.optim.mode == Mode::parametric) {
        auto fit = fit_parametric(data, graph, config.loss, config.optim);
        save_encoder(fit.encoder, (dir / "encoder.bin").string());
        emb = std::move(fit.embedding);
        result.log = std::move(fit.log);
    } else {
        auto fit = fit_nonparametric(data, graph, config.loss, config.optim);
        emb = std::move(fit.embedding);
        result.log = std::move(fit.log);
    }

    {
        auto out = open_output(dir / "embedding.csv", true);
        write_embedding_csv(data, emb.coords, out);
    }
    {
        auto out = open_output(dir / "training_log.jsonl", true);
        write_training_log(result.log, out);
    }
    result.quality = evaluate_quality(data, emb);
    open_output(dir / "quality.json") << quality_json(result.quality);
    if (config.plot) {
        emit_svg(emb.coords, data.labels.value_or(std::vector<int>{}), (dir / "plot.svg").string());
    }
    return result;
}

/*****************************
 *** bench *******************
 *****************************/

std::vector<BenchRow> run_bench(const BenchOptions& options) {
    if (options.losses.empty() || options.seeds.empty()) {
        throw UsageError("benchmark grid is empty");
    }
    std::vector<BenchRow> rows;
    for (auto loss : options.losses) {
        for (auto seed : options.seeds) {
            BenchRow row;
            row.loss = loss;
            row.seed = seed;
            rows.push_back(row);
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t r = next++; r < rows.size(); r = next++) {
            auto& row = rows[r];
            RunConfig config = options.base;
            config.loss.kind = row.loss;
            config.optim.seed = row.seed;
            config.out = (fs::path(options.base.out) /
                          (std::string(loss_name(row.loss)) + "-seed" + std::to_string(row.seed))).string();
            const auto start = std::chrono::steady_clock::now();
            try {
                const auto res = run_embed(config);
                row.quality = res.quality;
                row.final_loss = res.log.empty() ? 0.0 : res.log.back().mean_loss;
                row.ok = true;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
    };

    const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(rows.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    return rows;
}

namespace {

struct Summary {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
};

/// Mean and sample standard deviation (0 for a single value).
Summary summarize(const std::vector<double>& v) {
    Summary s;
    if (v.empty()) {
        return s;
    }
    double sum = 0;
    for (double x : v) {
        sum += x;
    }
    s.mean = sum / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) {
        ss += (x - s.mean) * (x - s.mean);
    }
    s.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return s;
}

using Metric = std::optional<double> QualityReport::*;

const std::vector<std::pair<std::string, Metric>>& bench_metrics() {
    static const std::vector<std::pair<std::string, Metric>> metrics = {
        {"knn_recall", &QualityReport::knn_recall},
        {"knn_accuracy", &QualityReport::knn_accuracy},
        {"silhouette", &QualityReport::silhouette},
    };
    return metrics;
}

Summary summarize_metric(const std::vector<BenchRow>& rows, LossKind loss, Metric metric) {
    std::vector<double> values;
    for (const auto& r : rows) {
        if (r.ok && r.loss == loss && (r.quality.*metric)) {
            values.push_back(*(r.quality.*metric));
        }
    }
    return summarize(values);
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

std::string csv_real(double x) {
    return std::isfinite(x) ? format_real(x) : std::string();
}

std::string csv_real(const std::optional<double>& x) {
    return x ? format_real(*x) : std::string();
}

json json_real(double x) {
    return std::isfinite(x) ? json(x) : json(nullptr);
}

}

void write_bench_tables(const std::vector<BenchRow>& rows, const std::string& dir) {
    fs::create_directories(dir);
    auto csv = open_output(fs::path(dir) / "bench.csv", true);
    csv << "loss,seed,status,error";
    for (const auto& [name, m] : bench_metrics()) {
        csv << ',' << name;
    }
    csv << ",final_loss,wall_ms";
    for (const auto& [name, m] : bench_metrics()) {
        csv << ',' << name << "_mean," << name << "_std";
    }
    csv << '\n';

    json table;
    table["rows"] = json::array();
    table["summary"] = json::object();
    for (const auto& r : rows) {
        const std::string loss(loss_name(r.loss));
        csv << loss << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ',' << csv_cell(r.error);
        json jr;
        jr["loss"] = loss;
        jr["seed"] = r.seed;
        jr["status"] = r.ok ? "ok" : "failed";
        jr["error"] = r.error;
        for (const auto& [name, m] : bench_metrics()) {
            csv << ',' << csv_real(r.quality.*m);
            jr[name] = optional_json(r.quality.*m);
        }
        csv << ',' << (r.ok ? format_real(r.final_loss) : std::string()) << ',' << format_real(r.wall_ms);
        jr["final_loss"] = r.ok ? json(r.final_loss) : json(nullptr);
        jr["wall_ms"] = r.wall_ms;
        for (const auto& [name, m] : bench_metrics()) {
            const auto s = summarize_metric(rows, r.loss, m);
            csv << ',' << csv_real(s.mean) << ',' << csv_real(s.sd);
            jr[name + "_mean"] = json_real(s.mean);
            jr[name + "_std"] = json_real(s.sd);
        }
        csv << '\n';
        table["rows"].push_back(jr);

        if (!table["summary"].contains(loss)) {
            json js;
            std::size_t runs = 0, ok = 0;
            for (const auto& other : rows) {
                if (other.loss == r.loss) {
                    ++runs;
                    ok += other.ok;
                }
            }
            js["runs"] = runs;
            js["succeeded"] = ok;
            for (const auto& [name, m] : bench_metrics()) {
                const auto s = summarize_metric(rows, r.loss, m);
                js[name] = {{"mean", json_real(s.mean)}, {"std", json_real(s.sd)}};
            }
            table["summary"][loss] = js;
        }
    }
    open_output(fs::path(dir) / "bench.json") << table.dump(2) << '\n';
}

/*****************************
 *** gradcheck ***************
 *****************************/

std::vector<GradcheckCase> gradcheck_cases(LossKind kind, Index m) {
    LossSpec<double> base;
    base.kind = kind;
    base.m = m;
    std::vector<GradcheckCase> cases{{"default", base}};
    if (kind == LossKind::trimap || kind == LossKind::tscne) {
        auto s = base;
        s.flags.log_ratio = true;
        cases.push_back({"log_ratio", s});
    }
    if (kind == LossKind::trimap || kind == LossKind::pacmap || kind == LossKind::tscne) {
        auto s = base;
        s.flags.paper_as_written = true;
        cases.push_back({"paper_as_written", s});
    }
    if (base.uses_temperature()) {
        auto s = base;
        s.flags.denominator_includes_positive = true;
        cases.push_back({"denominator_includes_positive", s});
    }
    return cases;
}

CheckProblem make_check_problem(const LossSpec<double>& spec, Index n, Index dim, std::uint64_t seed) {
    constexpr Index input_dim = 5;
    constexpr Index graph_k = 5;
    CheckProblem p;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    p.data.points.resize(n, input_dim);
    for (Index i = 0; i < p.data.points.size(); ++i) {
        p.data.points.data()[i] = normal(rng);
    }
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        labels[static_cast<std::size_t>(i)] = static_cast<int>(i % 3);
    }
    p.data.labels = std::move(labels);

    const auto graph = knn_graph(p.data.points, std::min(graph_k, n - 1));
    BatchSampler<double>::Options opt;
    opt.batch_size = 16;
    opt.m = spec.m;
    opt.n_midnear = spec.midnears_per_anchor();
    opt.label_positives = spec.supervised();
    opt.neighbor_positives = spec.needs_neighbor_sets();
    const BatchSampler<double> sampler(graph, p.data.points, &*p.data.labels, opt, seed);
    p.batch = sampler.draw(0, 0);

    p.coords.resize(n, dim);
    for (Index i = 0; i < p.coords.size(); ++i) {
        p.coords.data()[i] = normal(rng);
    }
    return p;
}

std::vector<GradcheckRow> run_gradcheck(const GradcheckOptions& options) {
    if (options.losses.empty()) {
        throw UsageError("no losses selected");
    }
    if (options.batches < 1) {
        throw UsageError("at least one batch is needed");
    }
    LossContext ctx;
    ctx.epoch = 0;
    ctx.total_epochs = 1;
    ctx.deterministic = true;
    ctx.workers = 1;

    std::vector<GradcheckRow> rows;
    for (auto kind : options.losses) {
        for (const auto& c : gradcheck_cases(kind, options.m)) {
            GradcheckRow row;
            row.loss = loss_name(kind);
            row.variant = c.variant;
            for (int b = 0; b < options.batches; ++b) {
                const auto p = make_check_problem(c.spec, options.n, options.dim,
                                                  options.seed * 1000003u + static_cast<std::uint64_t>(b));
                row.max_error = std::max(row.max_error, grad_check(c.spec, p.batch, p.coords, options.eps, ctx, options.corrupt));
            }
            row.pass = row.max_error < gradcheck_threshold;
            rows.push_back(row);
        }
    }
    return rows;
}

/*****************************
 *** command line ************
 *****************************/

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& cell : detail::split_csv_line(text)) {
        const std::string item(detail::trim(cell));
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

std::vector<LossKind> parse_losses(const std::string& text) {
    std::vector<LossKind> out;
    for (const auto& name : split_list(text)) {
        try {
            out.push_back(parse_loss_kind(name));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    for (const auto& s : split_list(text)) {
        std::uint64_t v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw UsageError("invalid seed '" + s + "'");
        }
        out.push_back(v);
    }
    return out;
}

/**
 * Command-line mirror of every `RunConfig` setting plus `--config`.
 */
struct RunFlags {
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> switches;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "sectioned key = value file; flags override it");
        for (const auto& k : setting_keys()) {
            const auto name = k.name();
            if (k.type == ValueType::boolean) {
                const auto neg = "!--no-" + k.flag.substr(2);
                app->add_flag_function(
                    k.flag + "," + neg, [this, name](std::int64_t count) { switches[name] = count > 0; }, k.help);
            } else {
                app->add_option_function<std::string>(
                    k.flag, [this, name](const std::string& v) { values[name] = v; }, k.help);
            }
        }
    }

    Settings settings() const {
        Settings s;
        if (!config_path.empty()) {
            s = read_settings(config_path);
        }
        for (const auto& [name, v] : values) {
            s[name] = v;
        }
        for (const auto& [name, on] : switches) {
            s[name] = on ? "true" : "false";
        }
        return s;
    }
};

void print_quality(std::ostream& out, const QualityReport& q) {
    auto show = [&](const char* name, const std::optional<double>& v) {
        out << "  " << std::left << std::setw(14) << name;
        if (v) {
            out << std::fixed << std::setprecision(4) << *v;
        } else {
            out << "n/a";
        }
        out << '\n';
    };
    out << "quality:\n";
    show(("knn_recall@" + std::to_string(q.k_recall)).c_str(), q.knn_recall);
    show(("knn_acc@" + std::to_string(q.k_accuracy)).c_str(), q.knn_accuracy);
    show("silhouette", q.silhouette);
    out.unsetf(std::ios::floatfield);
}

int cmd_gen(const std::string& source, std::uint64_t seed, const std::string& path, std::ostream& out) {
    const auto gen = parse_generator(source, seed);
    if (!gen) {
        throw UsageError("'" + source + "' is not a generator spec (expected blobs:... or moons:...)");
    }
    Dataset<double> data;
    try {
        data = generate(*gen);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (path.empty() || path == "-") {
        write_csv(data, out);
    } else {
        write_csv(data, path);
        out << "wrote " << data.size() << " samples (" << gen->to_string() << ") to " << path << '\n';
    }
    return exit_ok;
}

int cmd_embed(const RunFlags& flags, std::ostream& out) {
    RunConfig config = resolve(flags.settings());
    const auto res = run_embed(config);
    out << "loss " << loss_name(config.loss.kind) << ", " << res.log.size() << " epochs, final mean loss "
        << format_real(res.log.back().mean_loss) << '\n';
    print_quality(out, res.quality);
    out << "outputs in " << config.out << '\n';
    return exit_ok;
}

int cmd_bench(const RunFlags& flags, const std::optional<std::string>& losses, const std::optional<std::string>& seeds,
              unsigned jobs, std::ostream& out, std::ostream& err)
{
    BenchOptions opt;
    opt.base = resolve(flags.settings());
    opt.losses = losses ? parse_losses(*losses) : std::vector<LossKind>{opt.base.loss.kind};
    opt.seeds = seeds ? parse_seeds(*seeds) : std::vector<std::uint64_t>{opt.base.optim.seed};
    opt.jobs = jobs;
    const auto rows = run_bench(opt);
    write_bench_tables(rows, opt.base.out);

    std::size_t ok = 0;
    out << std::left << std::setw(10) << "loss" << std::setw(8) << "seed" << std::setw(10) << "recall" << std::setw(10)
        << "accuracy" << std::setw(11) << "silhouette" << '\n';
    for (const auto& r : rows) {
        out << std::setw(10) << loss_name(r.loss) << std::setw(8) << r.seed;
        if (r.ok) {
            ++ok;
            auto cell = [&](const std::optional<double>& v, int w) {
                std::ostringstream s;
                if (v) {
                    s << std::fixed << std::setprecision(4) << *v;
                } else {
                    s << "n/a";
                }
                out << std::setw(w) << s.str();
            };
            cell(r.quality.knn_recall, 10);
            cell(r.quality.knn_accuracy, 10);
            cell(r.quality.silhouette, 11);
            out << '\n';
        } else {
            out << "failed\n";
            err << loss_name(r.loss) << " seed " << r.seed << ": " << r.error << '\n';
        }
    }
    out << ok << "/" << rows.size() << " runs succeeded; tables in " << opt.base.out << '\n';
    return ok == 0 ? exit_runtime : exit_ok;
}

int cmd_gradcheck(const std::optional<std::string>& losses, GradcheckOptions opt, std::ostream& out) {
    if (!(opt.eps >= 1e-7 && opt.eps <= 1e-3)) {
        throw UsageError("--eps must lie in [1e-7, 1e-3]");
    }
    if (opt.batches < 1 || opt.m < 1) {
        throw UsageError("--batches and --m must be >= 1");
    }
    if (losses) {
        opt.losses = parse_losses(*losses);
    } else {
        opt.losses.assign(all_loss_kinds.begin(), all_loss_kinds.end());
    }
    const auto rows = run_gradcheck(opt);
    bool all = true;
    for (const auto& r : rows) {
        out << std::left << std::setw(10) << r.loss << std::setw(32) << r.variant << "max_rel_err=" << std::scientific
            << std::setprecision(3) << r.max_error << (r.pass ? "  ok" : "  FAIL") << '\n';
        all = all && r.pass;
    }
    out.unsetf(std::ios::floatfield);
    return all ? exit_ok : exit_runtime;
}

/// Column names of an embedding CSV header, or nothing without a header.
std::vector<std::string> header_of(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::string line;
    std::getline(in, line);
    std::vector<std::string> cols;
    for (const auto& c : detail::split_csv_line(line)) {
        cols.emplace_back(detail::trim(c));
    }
    return cols;
}

int cmd_plot(const std::string& input, std::optional<std::string> label_column, const std::string& path,
             std::ostream& out)
{
    const auto cols = header_of(input);
    CsvOptions opt;
    const auto has = [&](const char* name) { return std::find(cols.begin(), cols.end(), name) != cols.end(); };
    if (!label_column && has("label")) {
        label_column = "label";
    }
    opt.label_column = label_column;
    if (has("id")) {
        opt.id_column = "id";
    }
    const auto data = load_csv<double>(input, opt);
    emit_svg(data.points, data.labels.value_or(std::vector<int>{}), path);
    out << "wrote " << data.size() << " points to " << path << '\n';
    return exit_ok;
}

}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Contrastive neighbor embeddings: generate data, train embeddings, benchmark losses."};
    app.require_subcommand(1, 1);

    // gen
    auto* gen = app.add_subcommand("gen", "write a synthetic dataset as CSV");
    std::string gen_source = "blobs";
    std::string gen_out;
    std::uint64_t gen_seed = 0;
    gen->add_option("--data", gen_source, "generator spec, e.g. blobs:n_per_class=200,separation=20")->capture_default_str();
    gen->add_option("--seed", gen_seed, "seed used when the spec has none")->capture_default_str();
    gen->add_option("--out", gen_out, "output CSV path ('-' or empty for standard output)");

    // embed
    auto* embed = app.add_subcommand("embed", "train one embedding");
    RunFlags embed_flags;
    embed_flags.attach(embed);

    // bench
    auto* bench = app.add_subcommand("bench", "train a grid of losses and seeds and tabulate quality");
    RunFlags bench_flags;
    bench_flags.attach(bench);
    std::optional<std::string> bench_losses, bench_seeds;
    unsigned bench_jobs = 1;
    bench->add_option("--losses", bench_losses, "comma-separated losses (default: --loss)");
    bench->add_option("--seeds", bench_seeds, "comma-separated seeds (default: --seed)");
    bench->add_option("--jobs", bench_jobs, "concurrent runs")->capture_default_str()->check(CLI::PositiveNumber);

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "compare analytic and finite-difference loss gradients");
    std::optional<std::string> check_losses;
    GradcheckOptions check_opt;
    bool corrupt = false;
    gradcheck->add_option("--loss", check_losses, "comma-separated losses (default: all)");
    gradcheck->add_option("--batches", check_opt.batches, "random batches per loss")->capture_default_str();
    gradcheck->add_option("--seed", check_opt.seed, "random seed")->capture_default_str();
    gradcheck->add_option("--eps", check_opt.eps, "finite-difference step")->capture_default_str();
    gradcheck->add_option("--m", check_opt.m, "negatives per positive pair")->capture_default_str();
    gradcheck->add_flag("--corrupt-gradient", corrupt)->group("");

    // plot
    auto* plot = app.add_subcommand("plot", "draw an embedding CSV as an SVG scatter plot");
    std::string plot_in, plot_out = "plot.svg";
    std::optional<std::string> plot_labels;
    plot->add_option("--data", plot_in, "embedding CSV (id, z1..zd, label)")->required();
    plot->add_option("--label-column", plot_labels, "label column (default: 'label' if present)");
    plot->add_option("--out", plot_out, "output SVG path")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*gen) {
            return cmd_gen(gen_source, gen_seed, gen_out, out);
        }
        if (*embed) {
            return cmd_embed(embed_flags, out);
        }
        if (*bench) {
            return cmd_bench(bench_flags, bench_losses, bench_seeds, bench_jobs, out, err);
        }
        if (*gradcheck) {
            if (corrupt) {
                check_opt.corrupt = 1.5;
            }
            return cmd_gradcheck(check_losses, check_opt, out);
        }
        if (*plot) {
            return cmd_plot(plot_in, plot_labels, plot_out, out);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_usage;
}

}
