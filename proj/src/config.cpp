#include "cne/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cne::cli {

const std::vector<SettingKey>& setting_keys() {
    static const std::vector<SettingKey> keys = {
        {"data", "source", "--data", ValueType::text, "CSV file or generator spec (blobs:..., moons:...)"},
        {"data", "label_column", "--label-column", ValueType::text, "label column name or zero-based index"},
        {"data", "id_column", "--id-column", ValueType::text, "sample id column name or zero-based index"},
        {"data", "standardize", "--standardize", ValueType::boolean, "scale every feature to zero mean and unit variance"},
        {"graph", "k", "--k", ValueType::integer, "neighbors per sample in the input-space graph"},
        {"loss", "kind", "--loss", ValueType::text, "loss function"},
        {"loss", "m", "--m", ValueType::integer, "negatives per positive pair"},
        {"loss", "tau", "--tau", ValueType::real, "temperature of the exponential similarity"},
        {"loss", "w_p", "--w-p", ValueType::real, "weight of positive pairs"},
        {"loss", "w_u_init", "--w-u-init", ValueType::real, "initial mid-near weight"},
        {"loss", "w_u_final", "--w-u-final", ValueType::real, "final mid-near weight"},
        {"loss", "anneal_fraction", "--anneal-fraction", ValueType::real, "fraction of epochs over which the mid-near weight is annealed"},
        {"loss", "log_ratio", "--log-ratio", ValueType::boolean, "wrap TriMap / t-SCNE ratios in a log"},
        {"loss", "paper_as_written", "--paper-as-written", ValueType::boolean, "use the literal loss forms without corrections"},
        {"loss", "corrected_pacmap_sign", "--corrected-pacmap-sign", ValueType::boolean, "PaCMAP negatives use +phi/(phi+1)"},
        {"loss", "denominator_includes_positive", "--denominator-includes-positive", ValueType::boolean, "temperature losses put positives in the softmax denominator"},
        {"optim", "mode", "--mode", ValueType::text, "nonparametric or parametric"},
        {"optim", "epochs", "--epochs", ValueType::integer, "training epochs"},
        {"optim", "learning_rate", "--lr", ValueType::real, "initial learning rate"},
        {"optim", "lr_decay", "--lr-decay", ValueType::boolean, "decay the learning rate linearly to 0"},
        {"optim", "max_step", "--max-step", ValueType::real, "per-coordinate displacement clip for free coordinates (0 disables)"},
        {"optim", "momentum", "--momentum", ValueType::real, "momentum coefficient"},
        {"optim", "batch_size", "--batch-size", ValueType::integer, "positive pairs per step"},
        {"optim", "seed", "--seed", ValueType::integer, "master random seed"},
        {"optim", "deterministic", "--deterministic", ValueType::boolean, "results independent of the thread count"},
        {"optim", "dim", "--dim", ValueType::integer, "embedding dimension"},
        {"optim", "midnear_pool", "--midnear-pool", ValueType::integer, "candidates per mid-near sample"},
        {"optim", "hidden", "--hidden", ValueType::list, "hidden layer widths of the parametric encoder"},
        {"optim", "workers", "--workers", ValueType::integer, "gradient threads (0 = all cores)"},
        {"output", "dir", "--out", ValueType::text, "output directory"},
        {"output", "plot", "--plot", ValueType::boolean, "write plot.svg"},
    };
    return keys;
}

namespace {

std::string trim(const std::string& s) {
    return std::string(detail::trim(s));
}

template<typename T>
T parse_integer(const std::string& name, const std::string& text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, value);
    if (res.ec != std::errc() || res.ptr != end) {
        throw UsageError("'" + name + "' expects an integer, got '" + text + "'");
    }
    return value;
}

double parse_real(const std::string& name, const std::string& text) {
    const auto v = detail::parse_real(text);
    if (!v) {
        throw UsageError("'" + name + "' expects a finite number, got '" + text + "'");
    }
    return *v;
}

bool parse_bool(const std::string& name, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no" || text == "off") {
        return false;
    }
    throw UsageError("'" + name + "' expects true or false, got '" + text + "'");
}

std::vector<Index> parse_list(const std::string& name, const std::string& text) {
    std::vector<Index> out;
    if (trim(text).empty()) {
        return out;
    }
    for (const auto& cell : detail::split_csv_line(text)) {
        out.push_back(parse_integer<Index>(name, std::string(detail::trim(cell))));
    }
    return out;
}

std::string bool_text(bool b) {
    return b ? "true" : "false";
}

}

Settings parse_settings(std::istream& in, const std::string& origin) {
    Settings out;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') {
            continue;
        }
        const auto where = origin + ":" + std::to_string(lineno);
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3) {
                throw UsageError(where + ": malformed section header");
            }
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw UsageError(where + ": expected 'key = value'");
        }
        if (section.empty()) {
            throw UsageError(where + ": setting outside of any [section]");
        }
        const auto key = trim(t.substr(0, eq));
        if (key.empty()) {
            throw UsageError(where + ": empty key");
        }
        out[section + "." + key] = trim(t.substr(eq + 1));
    }
    return out;
}

Settings read_settings(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open config file '" + path + "'");
    }
    return parse_settings(in, path);
}

RunConfig resolve(const Settings& settings) {
    for (const auto& [name, value] : settings) {
        bool known = false;
        for (const auto& k : setting_keys()) {
            known = known || k.name() == name;
        }
        if (!known) {
            throw UsageError("unknown setting '" + name + "'");
        }
    }

    auto get = [&](const std::string& name) -> std::optional<std::string> {
        auto it = settings.find(name);
        if (it == settings.end()) {
            return std::nullopt;
        }
        return it->second;
    };

    RunConfig c;
    try {
        Mode mode = Mode::nonparametric;
        if (auto v = get("optim.mode")) {
            mode = parse_mode(*v);
        }
        c.optim = OptimConfig<double>::defaults(mode);
        if (auto v = get("loss.kind")) {
            c.loss.kind = parse_loss_kind(*v);
        }
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    auto text = [&](const char* name, auto& target) {
        if (auto v = get(name)) {
            target = *v;
        }
    };
    auto optional_text = [&](const char* name, std::optional<std::string>& target) {
        if (auto v = get(name)) {
            if (v->empty()) {
                target.reset();
            } else {
                target = *v;
            }
        }
    };
    auto integer = [&](const char* name, auto& target) {
        if (auto v = get(name)) {
            target = parse_integer<std::remove_reference_t<decltype(target)>>(name, *v);
        }
    };
    auto real = [&](const char* name, double& target) {
        if (auto v = get(name)) {
            target = parse_real(name, *v);
        }
    };
    auto boolean = [&](const char* name, bool& target) {
        if (auto v = get(name)) {
            target = parse_bool(name, *v);
        }
    };

    text("data.source", c.data);
    optional_text("data.label_column", c.label_column);
    optional_text("data.id_column", c.id_column);
    boolean("data.standardize", c.standardize);
    integer("graph.k", c.k);

    integer("loss.m", c.loss.m);
    real("loss.tau", c.loss.tau);
    real("loss.w_p", c.loss.schedule.w_p);
    real("loss.w_u_init", c.loss.schedule.w_u_init);
    real("loss.w_u_final", c.loss.schedule.w_u_final);
    real("loss.anneal_fraction", c.loss.schedule.anneal_fraction);
    boolean("loss.log_ratio", c.loss.flags.log_ratio);
    boolean("loss.paper_as_written", c.loss.flags.paper_as_written);
    boolean("loss.corrected_pacmap_sign", c.loss.flags.corrected_pacmap_sign);
    boolean("loss.denominator_includes_positive", c.loss.flags.denominator_includes_positive);

    integer("optim.epochs", c.optim.epochs);
    real("optim.learning_rate", c.optim.learning_rate);
    boolean("optim.lr_decay", c.optim.lr_decay);
    real("optim.max_step", c.optim.max_step);
    real("optim.momentum", c.optim.momentum);
    integer("optim.batch_size", c.optim.batch_size);
    integer("optim.seed", c.optim.seed);
    boolean("optim.deterministic", c.optim.deterministic);
    integer("optim.dim", c.optim.dim);
    integer("optim.midnear_pool", c.optim.midnear_pool);
    if (auto v = get("optim.hidden")) {
        c.optim.hidden = parse_list("optim.hidden", *v);
    }
    integer("optim.workers", c.optim.workers);

    text("output.dir", c.out);
    boolean("output.plot", c.plot);

    if (c.data.empty()) {
        throw UsageError("no data source given");
    }
    if (c.out.empty()) {
        throw UsageError("output directory must not be empty");
    }
    if (c.k < 1) {
        throw UsageError("k must be >= 1");
    }
    for (Index h : c.optim.hidden) {
        if (h < 1) {
            throw UsageError("hidden layer widths must be >= 1");
        }
    }
    if (c.optim.midnear_pool < 2) {
        throw UsageError("midnear_pool must be >= 2");
    }
    try {
        c.loss.validate();
        c.optim.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    parse_generator(c.data, c.optim.seed);
    return c;
}

std::string to_ini(const RunConfig& c) {
    std::ostringstream out;
    out << "[data]\n";
    out << "source = " << c.data << '\n';
    out << "label_column = " << c.label_column.value_or("") << '\n';
    out << "id_column = " << c.id_column.value_or("") << '\n';
    out << "standardize = " << bool_text(c.standardize) << '\n';
    out << "\n[graph]\n";
    out << "k = " << c.k << '\n';
    out << "\n[loss]\n";
    out << "kind = " << loss_name(c.loss.kind) << '\n';
    out << "m = " << c.loss.m << '\n';
    out << "tau = " << format_real(c.loss.tau) << '\n';
    out << "w_p = " << format_real(c.loss.schedule.w_p) << '\n';
    out << "w_u_init = " << format_real(c.loss.schedule.w_u_init) << '\n';
    out << "w_u_final = " << format_real(c.loss.schedule.w_u_final) << '\n';
    out << "anneal_fraction = " << format_real(c.loss.schedule.anneal_fraction) << '\n';
    out << "log_ratio = " << bool_text(c.loss.flags.log_ratio) << '\n';
    out << "paper_as_written = " << bool_text(c.loss.flags.paper_as_written) << '\n';
    out << "corrected_pacmap_sign = " << bool_text(c.loss.flags.corrected_pacmap_sign) << '\n';
    out << "denominator_includes_positive = " << bool_text(c.loss.flags.denominator_includes_positive) << '\n';
    out << "\n[optim]\n";
    out << "mode = " << mode_name(c.optim.mode) << '\n';
    out << "epochs = " << c.optim.epochs << '\n';
    out << "learning_rate = " << format_real(c.optim.learning_rate) << '\n';
    out << "lr_decay = " << bool_text(c.optim.lr_decay) << '\n';
    out << "max_step = " << format_real(c.optim.max_step) << '\n';
    out << "momentum = " << format_real(c.optim.momentum) << '\n';
    out << "batch_size = " << c.optim.batch_size << '\n';
    out << "seed = " << c.optim.seed << '\n';
    out << "deterministic = " << bool_text(c.optim.deterministic) << '\n';
    out << "dim = " << c.optim.dim << '\n';
    out << "midnear_pool = " << c.optim.midnear_pool << '\n';
    out << "hidden = ";
    for (std::size_t h = 0; h < c.optim.hidden.size(); ++h) {
        out << (h ? "," : "") << c.optim.hidden[h];
    }
    out << '\n';
    out << "workers = " << c.optim.workers << '\n';
    out << "\n[output]\n";
    out << "dir = " << c.out << '\n';
    out << "plot = " << bool_text(c.plot) << '\n';
    return out.str();
}

namespace {

const std::map<std::string, std::map<std::string, std::string>>& generator_defaults() {
    static const std::map<std::string, std::map<std::string, std::string>> defaults = {
        {"blobs", {{"n_per_class", "100"}, {"n_classes", "3"}, {"dim", "10"}, {"separation", "20"}}},
        {"moons", {{"n", "200"}, {"noise", "0.05"}}},
    };
    return defaults;
}

}

std::string GeneratorSpec::to_string() const {
    std::string out = kind;
    char sep = ':';
    for (const auto& [k, v] : params) {
        out += sep + k + "=" + v;
        sep = ',';
    }
    return out;
}

std::optional<GeneratorSpec> parse_generator(const std::string& source, std::uint64_t default_seed) {
    const auto colon = source.find(':');
    GeneratorSpec gen;
    gen.kind = source.substr(0, colon);
    const auto defaults = generator_defaults().find(gen.kind);
    if (defaults == generator_defaults().end()) {
        return std::nullopt;
    }
    gen.params = defaults->second;
    gen.params["seed"] = std::to_string(default_seed);

    if (colon != std::string::npos) {
        for (const auto& cell : detail::split_csv_line(std::string_view(source).substr(colon + 1))) {
            const std::string item = trim(std::string(cell));
            if (item.empty()) {
                continue;
            }
            const auto eq = item.find('=');
            if (eq == std::string::npos) {
                throw UsageError("generator parameter '" + item + "' is not of the form key=value");
            }
            const auto key = trim(item.substr(0, eq));
            if (!gen.params.count(key)) {
                throw UsageError("unknown " + gen.kind + " parameter '" + key + "'");
            }
            gen.params[key] = trim(item.substr(eq + 1));
        }
    }

    // Validate the values now so that errors surface as usage errors.
    for (const auto& [k, v] : gen.params) {
        if (k == "separation" || k == "noise") {
            parse_real(gen.kind + "." + k, v);
        } else {
            parse_integer<std::uint64_t>(gen.kind + "." + k, v);
        }
    }
    return gen;
}

Dataset<double> generate(const GeneratorSpec& gen) {
    auto integer = [&](const char* key) { return parse_integer<std::uint64_t>(key, gen.params.at(key)); };
    auto real = [&](const char* key) { return parse_real(key, gen.params.at(key)); };
    if (gen.kind == "blobs") {
        return make_blobs<double>(static_cast<Index>(integer("n_per_class")), static_cast<Index>(integer("n_classes")),
                                  static_cast<Index>(integer("dim")), real("separation"), integer("seed"));
    }
    if (gen.kind == "moons") {
        return make_moons<double>(static_cast<Index>(integer("n")), real("noise"), integer("seed"));
    }
    throw UsageError("unknown generator '" + gen.kind + "'");
}

Dataset<double> load_data(const RunConfig& config) {
    Dataset<double> data;
    if (auto gen = parse_generator(config.data, config.optim.seed)) {
        try {
            data = generate(*gen);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    } else {
        CsvOptions opt;
        opt.label_column = config.label_column;
        opt.id_column = config.id_column;
        data = load_csv<double>(config.data, opt);
    }
    return config.standardize ? standardize(std::move(data)) : data;
}

void canonicalize_source(RunConfig& config) {
    if (auto gen = parse_generator(config.data, config.optim.seed)) {
        config.data = gen->to_string();
    }
}

}
