// causalkit command-line front end: ingest -> screen -> discover ->
// evaluate / simulate / inquire, plus the end-to-end pipeline driver.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "causalkit/discovery.hpp"
#include "causalkit/errors.hpp"
#include "causalkit/inquiry.hpp"
#include "causalkit/metrics.hpp"
#include "causalkit/panel.hpp"
#include "causalkit/scm.hpp"
#include "causalkit/screening.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace causalkit;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
    std::string input;
    std::string target_code = "EN.ATM.CO2E.PC";
    double missing_threshold = 0.4;
    double ad_alpha = 0.1;
    double split = 0.8;
    int lag_step = 5;
    std::string bandwidth = "median";  // "median" or a number
    double eta = 0.05;
    double prune_alpha = 0.001;
    std::string prune_basis = "polynomial";
    int basis_size = 3;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string output = "run";
};

void validate(const RunConfig& cfg) {
    if (cfg.missing_threshold < 0.0 || cfg.missing_threshold >= 1.0)
        throw ConfigError("missing_threshold must lie in [0, 1)");
    if (cfg.ad_alpha <= 0.0 || cfg.ad_alpha >= 1.0) throw ConfigError("ad_alpha must lie in (0, 1)");
    if (cfg.split <= 0.0 || cfg.split >= 1.0) throw ConfigError("split must lie in (0, 1)");
    if (cfg.lag_step < 1) throw ConfigError("lag_step must be positive");
    if (cfg.eta <= 0.0) throw ConfigError("kernel eta must be positive");
    if (cfg.prune_alpha <= 0.0 || cfg.prune_alpha > 1.0) throw ConfigError("prune alpha must lie in (0, 1]");
    if (cfg.basis_size < 2) throw ConfigError("prune basis_size must be at least 2");
    if (cfg.bandwidth != "median") {
        try {
            if (std::stod(cfg.bandwidth) <= 0.0) throw ConfigError("bandwidth must be positive");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("bandwidth must be 'median' or a number: " + cfg.bandwidth);
        }
    }
    if (cfg.prune_basis != "polynomial" && cfg.prune_basis != "spline")
        throw ConfigError("prune basis must be 'polynomial' or 'spline'");
}

KernelConfig kernel_config(const RunConfig& cfg) {
    KernelConfig kernel;
    kernel.ridge_eta = cfg.eta;
    if (cfg.bandwidth != "median") kernel.bandwidth = std::stod(cfg.bandwidth);
    return kernel;
}

PruneConfig prune_config(const RunConfig& cfg) {
    PruneConfig prune;
    prune.significance_alpha = cfg.prune_alpha;
    prune.basis = cfg.prune_basis == "spline" ? PruneBasis::Spline : PruneBasis::Polynomial;
    prune.basis_size = cfg.basis_size;
    return prune;
}

json config_to_json(const RunConfig& cfg) {
    json kernel{{"bandwidth", cfg.bandwidth}, {"eta", cfg.eta}};
    json prune{{"alpha", cfg.prune_alpha}, {"basis", cfg.prune_basis}, {"basis_size", cfg.basis_size}};
    return json{{"input", cfg.input},
                {"target_code", cfg.target_code},
                {"missing_threshold", cfg.missing_threshold},
                {"ad_alpha", cfg.ad_alpha},
                {"split", cfg.split},
                {"lag_step", cfg.lag_step},
                {"kernel", kernel},
                {"prune", prune},
                {"seed", cfg.seed},
                {"output", cfg.output}};
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
}

// Applies config-file values, skipping any key whose flag was given on the
// command line (flags override the file).
void apply_config_file(RunConfig& cfg, const std::string& path, const CLI::App& app) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("bad config file " + path + ": " + e.what());
    }
    auto unset = [&](const char* flag) { return app.count(flag) == 0; };
    if (doc.contains("input") && unset("--input")) cfg.input = doc["input"].get<std::string>();
    if (doc.contains("target_code") && unset("--target-code")) cfg.target_code = doc["target_code"].get<std::string>();
    if (doc.contains("missing_threshold") && unset("--missing-threshold"))
        cfg.missing_threshold = doc["missing_threshold"].get<double>();
    if (doc.contains("ad_alpha") && unset("--ad-alpha")) cfg.ad_alpha = doc["ad_alpha"].get<double>();
    if (doc.contains("split") && unset("--split")) cfg.split = doc["split"].get<double>();
    if (doc.contains("lag_step") && unset("--lag-step")) cfg.lag_step = doc["lag_step"].get<int>();
    if (doc.contains("kernel")) {
        const json& kernel = doc["kernel"];
        if (kernel.contains("bandwidth") && unset("--bandwidth")) {
            const json& bw = kernel["bandwidth"];
            cfg.bandwidth = bw.is_number() ? std::to_string(bw.get<double>()) : bw.get<std::string>();
        }
        if (kernel.contains("eta") && unset("--eta")) cfg.eta = kernel["eta"].get<double>();
    }
    if (doc.contains("prune")) {
        const json& prune = doc["prune"];
        if (prune.contains("alpha") && unset("--prune-alpha")) cfg.prune_alpha = prune["alpha"].get<double>();
        if (prune.contains("basis") && unset("--prune-basis")) cfg.prune_basis = prune["basis"].get<std::string>();
        if (prune.contains("basis_size") && unset("--basis-size")) cfg.basis_size = prune["basis_size"].get<int>();
    }
    if (doc.contains("seed")) {
        if (unset("--seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
        cfg.seed_set = true;
    }
    if (doc.contains("output") && unset("--output")) cfg.output = doc["output"].get<std::string>();
}

std::string csv_number(double value) {
    std::ostringstream out;
    out << std::setprecision(17) << value;
    return out.str();
}

// ---------------------------------------------------------------------------
// Stages shared between the standalone subcommands and the pipeline.

std::vector<std::string> stage_ingest(const RunConfig& cfg, const fs::path& dir) {
    if (cfg.input.empty()) throw ConfigError("ingest requires --input");
    std::string text = read_file(cfg.input);
    std::istringstream header_probe(text);
    std::string header;
    std::getline(header_probe, header);
    PanelFormat format =
        header.rfind("country_code,indicator_code,year,value", 0) == 0 ? PanelFormat::Long : PanelFormat::Wide;

    std::istringstream in(text);
    RawPanel raw = parse_panel(in, format);
    IndicatorPanel panel = build_panel(raw, cfg.target_code);
    std::vector<std::string> warnings;
    IndicatorPanel filtered = filter_missing(panel, cfg.missing_threshold, &warnings);
    LaggedDataset lagged = build_lagged(filtered, cfg.lag_step);

    write_file(dir / "panel.json", filtered.to_json());
    write_file(dir / "lagged.json", lagged.to_json());
    for (const std::string& warning : warnings) std::cerr << "warning: " << warning << "\n";
    std::cout << "retained " << filtered.indicators.size() << " indicators over " << filtered.countries.size()
              << " countries; " << lagged.pairs.size() << " lag pairs, " << lagged.total_rows() << " rows\n";
    return {"panel.json", "lagged.json"};
}

std::vector<std::string> stage_screen(const RunConfig& cfg, const fs::path& dir) {
    LaggedDataset data = LaggedDataset::from_json(read_file(dir / "lagged.json"));
    ScreeningReport report = screen_variables(data, cfg.split, cfg.ad_alpha, cfg.seed);

    std::vector<std::string> codes = data.variable_codes;
    codes.push_back(data.target_code);
    CorrelationMatrix corr = pearson_matrix(data.pooled_with_target(), codes);

    std::ostringstream rank;
    rank << "code,correlation\n";
    for (const auto& [code, value] : sort_by_target(corr, data.target_code)) rank << code << "," << csv_number(value) << "\n";

    write_file(dir / "screening.json", report.to_json());
    write_file(dir / "correlation.csv", corr.to_csv());
    write_file(dir / "target_rank.csv", rank.str());
    std::cout << "retained " << report.retained.size() << " of " << data.variable_codes.size() << " variables\n";
    return {"screening.json", "correlation.csv", "target_rank.csv"};
}

LaggedDataset subset_dataset(const LaggedDataset& data, const std::vector<std::string>& keep) {
    std::vector<int> cols;
    LaggedDataset out;
    for (size_t c = 0; c < data.variable_codes.size(); ++c) {
        if (std::find(keep.begin(), keep.end(), data.variable_codes[c]) == keep.end()) continue;
        cols.push_back(static_cast<int>(c));
        out.variable_codes.push_back(data.variable_codes[c]);
        out.standardization.push_back(data.standardization[c]);
    }
    out.standardization.push_back(data.standardization.back());
    out.target_code = data.target_code;
    for (const LaggedPair& pair : data.pairs) {
        LaggedPair slim;
        slim.year_t = pair.year_t;
        slim.target = pair.target;
        slim.countries = pair.countries;
        slim.predictors.resize(pair.predictors.rows(), static_cast<int>(cols.size()));
        for (size_t c = 0; c < cols.size(); ++c) slim.predictors.col(c) = pair.predictors.col(cols[c]);
        out.pairs.push_back(std::move(slim));
    }
    return out;
}

std::vector<std::string> stage_discover(const RunConfig& cfg, const fs::path& dir, bool per_pair) {
    LaggedDataset data = LaggedDataset::from_json(read_file(dir / "lagged.json"));
    if (fs::exists(dir / "screening.json")) {
        json screening = json::parse(read_file(dir / "screening.json"));
        data = subset_dataset(data, screening["retained"].get<std::vector<std::string>>());
    }
    if (data.variable_codes.empty()) throw DegenerateDataError("no variables survived screening");

    KernelConfig kernel = kernel_config(cfg);
    PruneConfig prune = prune_config(cfg);
    DiscoveryResult result = discover(data, kernel, prune);

    std::vector<std::string> codes = data.variable_codes;
    codes.push_back(data.target_code);
    json order{{"order", result.order.order}, {"codes", codes}};

    write_file(dir / "order.json", order.dump(2));
    write_file(dir / "dag.dot", result.dag.to_dot());
    write_file(dir / "dag.csv", result.dag.to_adjacency_csv());
    write_file(dir / "diagnostics.json", result.diagnostics_json());
    std::cout << "discovered " << result.dag.edge_count() << " edges over " << codes.size() << " variables\n";

    std::vector<std::string> files{"order.json", "dag.dot", "dag.csv", "diagnostics.json"};
    if (per_pair) {
        for (const LaggedPair& pair : data.pairs) {
            Eigen::MatrixXd block(pair.predictors.rows(), pair.predictors.cols() + 1);
            block.leftCols(pair.predictors.cols()) = pair.predictors;
            block.col(pair.predictors.cols()) = pair.target;
            DiscoveryResult pair_result = discover_matrix(block, codes, kernel, prune);
            std::string stem = "dag_" + std::to_string(pair.year_t);
            write_file(dir / (stem + ".csv"), pair_result.dag.to_adjacency_csv());
            write_file(dir / (stem + ".dot"), pair_result.dag.to_dot());
            files.push_back(stem + ".csv");
            files.push_back(stem + ".dot");
        }
    }
    return files;
}

std::vector<std::string> pick_inquiry_codes(const fs::path& dir, const Dag& dag) {
    // Top target-ranked codes when the screening artifacts exist, otherwise
    // the DAG roster minus its final (target) node.
    std::vector<std::string> codes;
    if (fs::exists(dir / "target_rank.csv")) {
        std::istringstream in(read_file(dir / "target_rank.csv"));
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line) && codes.size() < 3) {
            std::string code = line.substr(0, line.find(','));
            if (!code.empty() && std::find(dag.codes.begin(), dag.codes.end(), code) != dag.codes.end())
                codes.push_back(code);
        }
    }
    if (codes.empty())
        codes.assign(dag.codes.begin(), dag.codes.size() > 1 ? dag.codes.end() - 1 : dag.codes.end());
    return codes;
}

std::vector<std::string> stage_inquire(const fs::path& dir, const fs::path& dag_path, std::vector<std::string> codes,
                                       const std::string& transport_path) {
    std::istringstream dag_in(read_file(dag_path));
    Dag dag = Dag::from_adjacency_csv(dag_in);
    if (codes.empty()) codes = pick_inquiry_codes(dir, dag);
    for (const std::string& code : codes) dag.node_index(code);  // LookupError on unknown code

    VerbLexicon lexicon = VerbLexicon::standard();
    std::vector<CausalQuestion> questions;
    for (Style style : {Style::Mixed, Style::Why}) {
        for (Theme theme : {Theme::UnderstandingVariables, Theme::HistoricalDataAnalysis, Theme::PredictiveModeling,
                            Theme::PolicyImpactEvaluation}) {
            auto batch = generate_questions(codes, theme, style, lexicon);
            questions.insert(questions.end(), batch.begin(), batch.end());
        }
    }
    write_file(dir / "questions.json", questions_to_json(questions));
    std::cout << "generated " << questions.size() << " questions\n";
    std::vector<std::string> files{"questions.json"};

    if (!transport_path.empty()) {
        DiscoveryContext context;
        for (int i = 0; i < dag.size(); ++i)
            for (int j : dag.children(i)) context.edges.push_back({dag.codes[i], dag.codes[j]});
        FixtureTransport transport = FixtureTransport::from_json(read_file(transport_path));
        InquiryClient client(transport, {});
        json transcripts = json::array();
        for (const CausalQuestion& question : questions) {
            std::string prompt = render_prompt(question, context);
            transcripts.push_back({{"prompt", prompt},
                                   {"prompt_hash", prompt_hash(prompt)},
                                   {"response", client.inquire(prompt)}});
        }
        write_file(dir / "transcripts.json", transcripts.dump(2));
        files.push_back("transcripts.json");
    }
    return files;
}

// ---------------------------------------------------------------------------
// Pipeline manifest bookkeeping.

std::string timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::ostringstream out;
    out << std::put_time(std::gmtime(&t), "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

void run_pipeline(const RunConfig& cfg, const std::string& transport_path, bool resume) {
    if (!cfg.seed_set) throw ConfigError("pipeline requires --seed");
    fs::path dir = cfg.output;
    fs::create_directories(dir);

    json manifest;
    if (resume && fs::exists(dir / "manifest.json")) manifest = json::parse(read_file(dir / "manifest.json"));
    manifest["config"] = config_to_json(cfg);
    manifest["seed"] = cfg.seed;
    manifest["version"] = kVersion;
    if (!manifest.contains("stages")) manifest["stages"] = json::object();
    manifest["started_at"] = timestamp();

    auto save = [&] { write_file(dir / "manifest.json", manifest.dump(2)); };
    auto run_stage = [&](const std::string& name, auto&& body) {
        if (resume && manifest["stages"].contains(name) && manifest["stages"][name]["status"] == "done") {
            std::cout << "skipping completed stage " << name << "\n";
            return;
        }
        try {
            std::vector<std::string> files = body();
            json outputs = json::object();
            for (const std::string& file : files) outputs[file] = prompt_hash(read_file(dir / file));
            manifest["stages"][name] = {{"status", "done"}, {"outputs", outputs}};
            save();
        } catch (...) {
            manifest["stages"][name] = {{"status", "failed"}};
            try {
                throw;
            } catch (const std::exception& e) {
                manifest["stages"][name]["error"] = e.what();
            }
            manifest["finished_at"] = timestamp();
            save();
            throw;
        }
    };

    run_stage("ingest", [&] { return stage_ingest(cfg, dir); });
    run_stage("screen", [&] { return stage_screen(cfg, dir); });
    run_stage("discover", [&] { return stage_discover(cfg, dir, false); });
    run_stage("inquire", [&] { return stage_inquire(dir, dir / "dag.csv", {}, transport_path); });

    manifest["finished_at"] = timestamp();
    save();
    std::cout << "pipeline complete: " << dir.string() << "\n";
}

void run_simulate(const RunConfig& cfg, int d, int n, int seeds, std::optional<double> edge_prob,
                  const std::string& family_name_arg, const fs::path& dir) {
    if (!cfg.seed_set) throw ConfigError("simulate requires --seed");
    if (d < 2 || n < 10 || seeds < 1) throw ConfigError("simulate requires d >= 2, n >= 10, seeds >= 1");
    MechanismFamily family = family_from_name(family_name_arg);
    KernelConfig kernel = kernel_config(cfg);
    PruneConfig prune = prune_config(cfg);

    std::vector<MetricsReport> reports;
    int order_ok = 0;
    for (int s = 0; s < seeds; ++s) {
        std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
        Dag dag = edge_prob ? random_dag(d, *edge_prob, seed) : chain_dag(d);
        Scm scm = random_scm(dag, family, seed);
        Eigen::MatrixXd data = sample(scm, n, seed + 1000);
        DiscoveryResult result = discover_matrix(data, dag.codes, kernel, prune);
        reports.push_back(back_re(dag, result.dag));

        std::vector<int> pos(d);
        for (int i = 0; i < d; ++i) pos[result.order.order[i]] = i;
        bool respects = true;
        for (int i = 0; i < d && respects; ++i)
            for (int j : dag.children(i))
                if (pos[i] > pos[j]) respects = false;
        order_ok += respects;

        fs::path seed_dir = dir / ("sim_seed_" + std::to_string(s));
        write_file(seed_dir / "scm.json", scm.to_json());
        write_file(seed_dir / "metrics.json", reports.back().to_json());
        std::ostringstream samples;
        samples << std::setprecision(17);
        for (size_t c = 0; c < dag.codes.size(); ++c) samples << (c ? "," : "") << dag.codes[c];
        samples << "\n";
        for (int r = 0; r < data.rows(); ++r) {
            for (int c = 0; c < data.cols(); ++c) samples << (c ? "," : "") << data(r, c);
            samples << "\n";
        }
        write_file(seed_dir / "samples.csv", samples.str());
    }

    auto stats = [&](auto getter) {
        double mean = 0.0;
        for (const MetricsReport& r : reports) mean += getter(r);
        mean /= reports.size();
        double var = 0.0;
        for (const MetricsReport& r : reports) var += (getter(r) - mean) * (getter(r) - mean);
        return std::pair{mean, std::sqrt(var / reports.size())};
    };

    std::ostringstream table;
    table << "metric,mean,stddev\n";
    auto row = [&](const char* name, std::pair<double, double> ms) {
        table << name << "," << csv_number(ms.first) << "," << csv_number(ms.second) << "\n";
    };
    row("sid", stats([](const MetricsReport& r) { return double(r.sid); }));
    row("shd", stats([](const MetricsReport& r) { return double(r.shd); }));
    row("precision", stats([](const MetricsReport& r) { return r.precision; }));
    row("recall", stats([](const MetricsReport& r) { return r.recall; }));
    row("f1", stats([](const MetricsReport& r) { return r.f1; }));
    row("l2", stats([](const MetricsReport& r) { return r.l2; }));
    row("order_accuracy", {double(order_ok) / seeds, 0.0});
    write_file(dir / "simulate.csv", table.str());
    std::cout << table.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal-discovery toolkit for indicator panels"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    bool per_pair = false;
    bool resume = false;
    std::string transport_path;
    std::string dag_path, truth_path, predicted_path;
    std::vector<std::string> inquire_codes;
    int sim_d = 5, sim_n = 1000, sim_seeds = 10;
    std::optional<double> sim_edge_prob;
    std::string sim_family = "tanh";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration; flags override file values");
        sub->add_option("--input", cfg.input, "input panel CSV");
        sub->add_option("--target-code", cfg.target_code, "target indicator code");
        sub->add_option("--missing-threshold", cfg.missing_threshold, "max allowed missing ratio");
        sub->add_option("--ad-alpha", cfg.ad_alpha, "distribution-shift significance level");
        sub->add_option("--split", cfg.split, "train fraction for screening");
        sub->add_option("--lag-step", cfg.lag_step, "lag step in years");
        sub->add_option("--bandwidth", cfg.bandwidth, "kernel bandwidth: 'median' or a number");
        sub->add_option("--eta", cfg.eta, "kernel ridge regularizer");
        sub->add_option("--prune-alpha", cfg.prune_alpha, "edge-pruning significance level");
        sub->add_option("--prune-basis", cfg.prune_basis, "pruning basis: polynomial or spline");
        sub->add_option("--basis-size", cfg.basis_size, "pruning basis size");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--output", cfg.output, "run directory");
        return sub;
    };

    CLI::App* ingest = add_common(app.add_subcommand("ingest", "parse, filter, and lag an indicator panel"));
    CLI::App* screen = add_common(app.add_subcommand("screen", "distribution screening and correlation ranking"));
    CLI::App* discover_cmd = add_common(app.add_subcommand("discover", "causal order, DAG, and diagnostics"));
    discover_cmd->add_flag("--per-pair", per_pair, "emit one DAG per lag pair");
    CLI::App* evaluate = add_common(app.add_subcommand("evaluate", "compare predicted DAG against a reference"));
    evaluate->add_option("--truth", truth_path, "reference adjacency CSV")->required();
    evaluate->add_option("--predicted", predicted_path, "predicted adjacency CSV")->required();
    CLI::App* simulate = add_common(app.add_subcommand("simulate", "synthetic-model recovery study"));
    simulate->add_option("--d", sim_d, "number of variables");
    simulate->add_option("--n", sim_n, "samples per seed");
    simulate->add_option("--seeds", sim_seeds, "number of seeds");
    simulate->add_option("--edge-prob", sim_edge_prob, "random-graph edge probability (omit for a chain)");
    simulate->add_option("--family", sim_family, "mechanism family (linear, polynomial, tanh, sinmix)");
    CLI::App* inquire = add_common(app.add_subcommand("inquire", "question battery from a discovered DAG"));
    inquire->add_option("--dag", dag_path, "adjacency CSV of the discovered DAG");
    inquire->add_option("--codes", inquire_codes, "variable codes to slot into the battery");
    inquire->add_option("--transport", transport_path, "canned-response transport JSON");
    CLI::App* pipeline = add_common(app.add_subcommand("pipeline", "ingest, screen, discover, inquire end to end"));
    pipeline->add_flag("--resume", resume, "re-run only stages that have not completed");
    pipeline->add_option("--transport", transport_path, "canned-response transport JSON");

    auto finish_config = [&](const CLI::App* sub) {
        if (!config_path.empty()) apply_config_file(cfg, config_path, *sub);
        if (sub->count("--seed") > 0) cfg.seed_set = true;
        validate(cfg);
    };

    ingest->callback([&] {
        finish_config(ingest);
        stage_ingest(cfg, cfg.output);
    });
    screen->callback([&] {
        finish_config(screen);
        stage_screen(cfg, cfg.output);
    });
    discover_cmd->callback([&] {
        finish_config(discover_cmd);
        if (!cfg.seed_set) throw ConfigError("discover requires --seed");
        stage_discover(cfg, cfg.output, per_pair);
    });
    evaluate->callback([&] {
        finish_config(evaluate);
        std::istringstream truth_in(read_file(truth_path));
        std::istringstream predicted_in(read_file(predicted_path));
        Dag truth = Dag::from_adjacency_csv(truth_in);
        Dag predicted = Dag::from_adjacency_csv(predicted_in);
        if (truth.codes != predicted.codes) throw ContractError("truth and predicted DAGs carry different codes");
        MetricsReport report = back_re(truth, predicted);
        write_file(fs::path(cfg.output) / "metrics.json", report.to_json());
        std::cout << report.to_json() << "\n";
    });
    simulate->callback([&] {
        finish_config(simulate);
        run_simulate(cfg, sim_d, sim_n, sim_seeds, sim_edge_prob, sim_family, cfg.output);
    });
    inquire->callback([&] {
        finish_config(inquire);
        fs::path dag_file = dag_path.empty() ? fs::path(cfg.output) / "dag.csv" : fs::path(dag_path);
        stage_inquire(cfg.output, dag_file, inquire_codes, transport_path);
    });
    pipeline->callback([&] {
        finish_config(pipeline);
        run_pipeline(cfg, transport_path, resume);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\nhint: raise the kernel ridge via --eta\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
