// p300sim: build language models, draw cohorts, run typing simulations and
// scheme comparisons, and summarize results.
//
// Exit codes: 0 ok, 1 runtime error, 2 invalid input or configuration.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

// Eigen before httplib: <resolv.h> defines a _res macro that breaks Eigen.
#include "p300/error.hpp"
#include "p300/experiment.hpp"
#include "p300/run_config.hpp"
#include "p300/stats.hpp"

#include "httplib.h"
#include "p300/http_predictor.hpp"

namespace {

using namespace p300;
namespace fs = std::filesystem;

constexpr int kExitRuntime = 1;
constexpr int kExitInvalid = 2;

// ---------------------------------------------------------------------------
// Configuration: file, then environment, then flags

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers, chars, subjects, clusters;
    std::optional<double> p_thresh, dprime_mean, dprime_sd;
    std::optional<std::string> corpus, lm_dir, target, features, url, mock_table, out, scheme, predictor, slot_mass,
        check;
    std::vector<std::string> conditions, trainings;
};

template <class T>
void set_if(const std::optional<T>& v, T& dst) {
    if (v) dst = *v;
}

void add_common_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config, "JSON run configuration");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--workers", o.workers, "simulation threads");
    cmd->add_option("--corpus", o.corpus, "training corpus text");
    cmd->add_option("--lm-dir", o.lm_dir, "saved count tables (instead of --corpus)");
    cmd->add_option("--target", o.target, "target text to copy");
    cmd->add_option("--chars", o.chars, "characters of the target to type (0 = all)");
    cmd->add_option("--features", o.features, "labelled-feature CSV (instead of a synthetic cohort)");
    cmd->add_option("--subjects", o.subjects, "synthetic cohort size");
    cmd->add_option("--clusters", o.clusters, "synthetic template clusters");
    cmd->add_option("--dprime-mean", o.dprime_mean, "synthetic d' mean");
    cmd->add_option("--dprime-sd", o.dprime_sd, "synthetic d' standard deviation");
    cmd->add_option("--training", o.trainings, "training modes: wscv, ascv");
    cmd->add_option("--predictor-url", o.url, "external predictor base URL");
    cmd->add_option("--mock-table", o.mock_table, "saved mock predictor table");
    cmd->add_option("--p-thresh", o.p_thresh, "decoder threshold");
    cmd->add_option("--check", o.check, "threshold check point: flash, sequence");
    cmd->add_option("--slot-mass", o.slot_mass, "suggestion prior: joint, fixed");
    cmd->add_option("-o,--out", o.out, "output directory");
}

run::RunConfig resolve(const Overrides& o) {
    run::RunConfig c = o.config.empty() ? run::RunConfig{} : run::load_config(o.config);
    if (const char* env = std::getenv(std::string(run::kPredictorUrlEnv).c_str()); env && *env) c.predictor_url = env;
    set_if(o.seed, c.seed);
    set_if(o.workers, c.workers);
    set_if(o.chars, c.chars);
    set_if(o.subjects, c.cohort.n_subjects);
    set_if(o.clusters, c.cohort.clusters);
    set_if(o.dprime_mean, c.cohort.dprime_mean);
    set_if(o.dprime_sd, c.cohort.dprime_sd);
    set_if(o.p_thresh, c.sim.decoder.p_thresh);
    set_if(o.corpus, c.corpus);
    set_if(o.lm_dir, c.lm_dir);
    set_if(o.target, c.target);
    set_if(o.features, c.features);
    set_if(o.url, c.predictor_url);
    set_if(o.mock_table, c.mock_table);
    set_if(o.out, c.out_dir);
    if (o.scheme) c.sim.scheme = board::parse_scheme(*o.scheme);
    if (o.predictor) c.sim.predictor = sim::parse_predictor(*o.predictor);
    if (o.slot_mass) c.sim.slot_mass = sim::parse_slot_mass(*o.slot_mass);
    if (o.check) c.sim.decoder.check = decode::parse_check_point(*o.check);
    if (!o.conditions.empty()) c.conditions = o.conditions;
    if (!o.trainings.empty()) {
        c.trainings.clear();
        for (const auto& t : o.trainings) c.trainings.push_back(experiment::parse_training(t));
    }
    c.validate();
    return c;
}

void require_file(const std::string& path, const std::string& what) {
    require(!path.empty(), what + " path is not set");
    require(fs::exists(path), what + " not found: " + path);
}

run::RunManifest start_manifest(const std::string& command, const run::RunConfig& c) {
    run::RunManifest m;
    m.command = command;
    m.config = run::to_json(c);
    m.seeds["master"] = c.seed;
    return m;
}

// ---------------------------------------------------------------------------
// Shared loading

struct LoadedLanguage {
    lm::ModelStack stack;
    std::unique_ptr<predict::ExternalPredictor> external;
    std::unique_ptr<sim::Language> lang;
    std::string goal;
};

std::unique_ptr<LoadedLanguage> load_language(const run::RunConfig& c, run::RunManifest& m) {
    auto out = std::make_unique<LoadedLanguage>();
    if (!c.lm_dir.empty()) {
        require_file(c.lm_dir, "language model directory");
        out->stack = lm::load_models(c.lm_dir, c.smoothing);
        m.add_input(c.lm_dir);
    } else {
        require_file(c.corpus, "corpus");
        out->stack = lm::build_models(run::read_text(c.corpus), {}, c.smoothing);
        m.add_input(c.corpus);
    }
    require_file(c.target, "target text");
    out->goal = sim::make_goal(run::read_text(c.target), static_cast<std::size_t>(c.chars));
    m.add_input(c.target);

    if (!c.predictor_url.empty()) {
        out->external = std::make_unique<predict::HttpPredictor>(
            c.predictor_url, std::chrono::milliseconds(c.predictor_timeout_ms));
    } else if (!c.mock_table.empty()) {
        require_file(c.mock_table, "mock table");
        out->external = std::make_unique<predict::MockPredictor>(predict::MockPredictor::load(c.mock_table));
        m.add_input(c.mock_table);
    } else {
        std::string knowledge;
        for (const auto& f : c.mock_knowledge) {
            require_file(f, "mock knowledge file");
            knowledge += run::read_text(f) + "\n";
            m.add_input(f);
        }
        out->external = std::make_unique<predict::MockPredictor>(predict::build_mock_table(knowledge));
    }
    out->lang = std::make_unique<sim::Language>(out->stack, out->external.get(), c.sim.trellis);
    return out;
}

struct LoadedCohort {
    std::vector<int> ids;
    std::vector<std::vector<eeg::SubjectScoreModel>> models;  // by training mode
    std::vector<std::string> diagnostics;
};

LoadedCohort load_cohort(const run::RunConfig& c, run::RunManifest& m) {
    std::vector<swlda::SubjectData> data;
    if (!c.features.empty()) {
        require_file(c.features, "feature file");
        std::ifstream in(c.features, std::ios::binary);
        data = swlda::read_feature_csv(in);
        m.add_input(c.features);
    } else {
        auto p = c.cohort;
        p.seed = c.cohort_seed();
        m.seeds["cohort"] = p.seed;
        data = eeg::cohort_data(eeg::gen_synthetic_cohort(p));
    }
    LoadedCohort out;
    for (const auto& d : data) out.ids.push_back(d.subject);
    for (auto t : c.trainings) {
        auto fit = experiment::fit_models(data, t, c.score_mode, c.folds);
        for (auto& msg : fit.diagnostics) out.diagnostics.push_back(std::string(experiment::training_name(t)) + " " + msg);
        out.models.push_back(std::move(fit.models));
    }
    return out;
}

void print_diagnostics(const std::vector<std::string>& d) {
    for (const auto& msg : d) std::cerr << "warning: " << msg << '\n';
}

nlohmann::json with_manifest(nlohmann::json body, const run::RunManifest& m) {
    body["manifest"] = m.header();
    return body;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_build_lm(const Overrides& o) {
    const auto c = resolve(o);
    require_file(c.corpus, "corpus");
    auto m = start_manifest("build-lm", c);
    m.add_input(c.corpus);
    const auto stack = lm::build_models(run::read_text(c.corpus), {}, c.smoothing);
    lm::save_models(stack, c.out_dir);
    for (lm::Level l : lm::kAllLevels) {
        const std::string name = std::string(lm::level_name(l)) + ".counts";
        m.outputs[name] = run::file_hash(fs::path(c.out_dir) / name);
    }
    run::write_manifest(m, c.out_dir);
    std::cout << "wrote count tables to " << c.out_dir << '\n';
    return 0;
}

int cmd_gen_cohort(const Overrides& o) {
    const auto c = resolve(o);
    auto m = start_manifest("gen-cohort", c);
    auto p = c.cohort;
    p.seed = c.cohort_seed();
    m.seeds["cohort"] = p.seed;
    const auto cohort = eeg::gen_synthetic_cohort(p);

    std::ostringstream csv;
    swlda::write_feature_csv(eeg::cohort_data(cohort), csv);
    nlohmann::json subjects = nlohmann::json::array();
    for (const auto& s : cohort)
        subjects.push_back({{"subject", s.data.subject}, {"dprime", s.dprime}, {"cluster", s.cluster}});
    run::write_output(m, c.out_dir, "features.csv", csv.str());
    run::write_output(m, c.out_dir, "cohort.json", with_manifest({{"subjects", subjects}}, m).dump(2) + "\n");
    run::write_manifest(m, c.out_dir);
    std::cout << "wrote " << cohort.size() << " subjects to " << c.out_dir << '\n';
    return 0;
}

int cmd_simulate(const Overrides& o, const std::optional<std::string>& condition, std::optional<int> trace_subject) {
    auto c = resolve(o);
    if (condition) {
        const auto cond = experiment::parse_condition(*condition);
        c.sim.scheme = cond.scheme;
        c.sim.predictor = cond.predictor;
    }
    auto m = start_manifest("simulate", c);
    const auto language = load_language(c, m);
    const auto cohort = load_cohort(c, m);
    print_diagnostics(cohort.diagnostics);

    experiment::ComparisonResult r;
    r.conditions = {{c.sim.scheme, c.sim.predictor}};
    for (auto t : c.trainings)
        for (int id : cohort.ids) {
            experiment::CellResult cell;
            cell.training = t;
            cell.subject = id;
            cell.seed = experiment::cell_seed(c.seed, id, r.conditions[0], t);
            r.cells.push_back(cell);
        }
    std::string trace;
    experiment::parallel_for(r.cells.size(), c.workers, [&](std::size_t i) {
        auto& cell = r.cells[i];
        const std::size_t t = std::find(c.trainings.begin(), c.trainings.end(), cell.training) - c.trainings.begin();
        const std::size_t s = i % cohort.ids.size();
        std::ostringstream tr;
        const bool traced = trace_subject && *trace_subject == cell.subject && t == 0;
        const auto res = sim::simulate_subject(c.sim, *language->lang, cohort.models[t][s], language->goal, cell.seed,
                                               traced ? &tr : nullptr);
        if (traced) trace = tr.str();
        cell.itr = res.itr;
        cell.retry = res.retry;
        cell.selections = static_cast<int>(res.selections.size());
        cell.flashes = res.total_flashes();
        cell.abandoned = res.abandoned();
        cell.items = static_cast<int>(res.items.size());
        cell.transcript_matches = res.transcript == res.goal;
    });

    nlohmann::json groups = nlohmann::json::array();
    for (auto t : c.trainings) {
        std::vector<double> itr, retry;
        for (const auto& cell : r.cells)
            if (cell.training == t) {
                itr.push_back(cell.itr);
                retry.push_back(cell.retry);
            }
        groups.push_back({{"condition", r.conditions[0].label()},
                          {"training", experiment::training_name(t)},
                          {"itr", stats::violin_to_json(stats::violin(itr))},
                          {"retry_rate_mean", stats::mean(retry)}});
    }
    std::ostringstream csv;
    experiment::write_results_csv(r, csv);
    run::write_output(m, c.out_dir, "results.csv", csv.str());
    run::write_output(m, c.out_dir, "summary.json", with_manifest({{"groups", groups}}, m).dump(2) + "\n");
    if (trace_subject) {
        require(!trace.empty(), "no subject " + std::to_string(*trace_subject) + " in the cohort");
        run::write_output(m, c.out_dir, "trace.jsonl", trace);
    }
    run::write_manifest(m, c.out_dir);
    for (const auto& g : groups)
        std::cout << g["condition"].get<std::string>() << ' ' << g["training"].get<std::string>() << ": ITR mean "
                  << g["itr"]["mean"].get<double>() << " bits/min\n";
    return 0;
}

int cmd_compare(const Overrides& o) {
    const auto c = resolve(o);
    auto m = start_manifest("compare", c);
    const auto language = load_language(c, m);
    const auto cohort = load_cohort(c, m);
    print_diagnostics(cohort.diagnostics);

    experiment::ComparisonSpec spec;
    for (const auto& s : c.conditions) spec.conditions.push_back(experiment::parse_condition(s));
    spec.trainings = c.trainings;
    spec.sim = c.sim;
    spec.seed = c.seed;
    spec.workers = c.workers;
    const auto r = experiment::run_comparison(spec, *language->lang, cohort.models, cohort.ids, language->goal);

    std::ostringstream rows, table;
    experiment::write_results_csv(r, rows);
    experiment::write_table_csv(r, spec.trainings, table);
    run::write_output(m, c.out_dir, "results.csv", rows.str());
    run::write_output(m, c.out_dir, "table.csv", table.str());
    run::write_output(m, c.out_dir, "stats.json", with_manifest(experiment::comparison_to_json(r), m).dump(2) + "\n");
    run::write_manifest(m, c.out_dir);
    std::cout << table.str();
    return 0;
}

struct ResultRow {
    int subject;
    std::string condition, training;
    double itr, retry;
};

std::vector<ResultRow> read_results_csv(const fs::path& file) {
    std::istringstream in(run::read_text(file));
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), file.string() + " is empty");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) header.push_back(cell);
    }
    auto col = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        require(it != header.end(), file.string() + ": missing column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto cs = col("subject"), cc = col("condition"), ct = col("training"), ci = col("itr"),
               cr = col("retry_rate");
    std::vector<ResultRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> v;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) v.push_back(cell);
        require(v.size() == header.size(), file.string() + ":" + std::to_string(lineno) + ": wrong column count");
        try {
            rows.push_back({std::stoi(v[cs]), v[cc], v[ct], std::stod(v[ci]), std::stod(v[cr])});
        } catch (const std::exception&) {
            throw ValidationError(file.string() + ":" + std::to_string(lineno) + ": bad number");
        }
    }
    require(!rows.empty(), file.string() + " has no rows");
    return rows;
}

template <class F>
nlohmann::json try_test(F&& f) {
    try {
        return stats::report_to_json(f());
    } catch (const ValidationError& e) {
        return {{"skipped", e.what()}};
    }
}

int cmd_report(const std::string& results_dir, const std::optional<std::string>& out_opt) {
    const fs::path dir(results_dir);
    const fs::path results = dir / "results.csv";
    require_file(results.string(), "results file");
    const std::string out = out_opt.value_or((dir / "report").string());
    run::RunManifest m;
    m.command = "report";
    m.config = {{"results", results_dir}, {"out_dir", out}};
    m.add_input(results);

    const auto rows = read_results_csv(results);
    // (training, condition) -> subject -> itr, in first-seen condition order
    std::vector<std::string> conditions, trainings;
    std::map<std::pair<std::string, std::string>, std::map<int, double>> itr;
    for (const auto& r : rows) {
        if (std::find(conditions.begin(), conditions.end(), r.condition) == conditions.end())
            conditions.push_back(r.condition);
        if (std::find(trainings.begin(), trainings.end(), r.training) == trainings.end())
            trainings.push_back(r.training);
        itr[{r.training, r.condition}][r.subject] = r.itr;
    }
    auto values = [](const std::map<int, double>& by_subject) {
        std::vector<double> v;
        for (const auto& [s, x] : by_subject) v.push_back(x);
        return v;
    };

    nlohmann::json groups = nlohmann::json::array(), omnibus = nlohmann::json::array(),
                   pairs = nlohmann::json::array();
    std::ostringstream quart, bins;
    quart << "condition,training,n,min,q1,median,q3,max,mean,sd\n";
    bins << "condition,training,bin_lo,bin_hi,density\n";
    for (const auto& t : trainings) {
        std::vector<std::vector<double>> per_condition;
        for (const auto& cond : conditions) {
            const auto it = itr.find({t, cond});
            if (it == itr.end()) continue;
            const auto v = values(it->second);
            per_condition.push_back(v);
            const auto vs = stats::violin(v);
            groups.push_back({{"condition", cond},
                              {"training", t},
                              {"itr", stats::violin_to_json(vs)},
                              {"shapiro_wilk", try_test([&] { return stats::shapiro_wilk(v); })},
                              {"kolmogorov_smirnov", try_test([&] { return stats::ks_normality(v); })}});
            quart << cond << ',' << t << ',' << vs.n << ',' << vs.min << ',' << vs.q1 << ',' << vs.median << ','
                  << vs.q3 << ',' << vs.max << ',' << vs.mean << ',' << vs.sd << '\n';
            for (std::size_t b = 0; b < vs.densities.size(); ++b)
                bins << cond << ',' << t << ',' << vs.edges[b] << ',' << vs.edges[b + 1] << ',' << vs.densities[b]
                     << '\n';
        }
        if (per_condition.size() >= 2)
            omnibus.push_back({{"training", t},
                               {"kruskal_wallis", try_test([&] { return stats::kruskal_wallis(per_condition); })}});
        for (std::size_t a = 0; a < conditions.size(); ++a)
            for (std::size_t b = a + 1; b < conditions.size(); ++b) {
                const auto ia = itr.find({t, conditions[a]}), ib = itr.find({t, conditions[b]});
                if (ia == itr.end() || ib == itr.end()) continue;
                std::vector<double> xa, xb;  // paired by subject
                for (const auto& [s, x] : ia->second)
                    if (auto jt = ib->second.find(s); jt != ib->second.end()) {
                        xa.push_back(x);
                        xb.push_back(jt->second);
                    }
                pairs.push_back({{"training", t},
                                 {"a", conditions[a]},
                                 {"b", conditions[b]},
                                 {"wilcoxon", try_test([&] { return stats::wilcoxon_signed_rank(xa, xb); })}});
            }
    }
    run::write_output(m, out, "quartiles.csv", quart.str());
    run::write_output(m, out, "violin.csv", bins.str());
    run::write_output(
        m, out, "report.json",
        with_manifest({{"groups", groups}, {"omnibus", omnibus}, {"pairwise", pairs}}, m).dump(2) + "\n");
    run::write_manifest(m, out);
    std::cout << quart.str();
    return 0;
}

int cmd_mock_table(const std::vector<std::string>& knowledge, const std::string& out, int per_entry) {
    std::string text;
    for (const auto& f : knowledge) {
        require_file(f, "knowledge file");
        text += run::read_text(f) + "\n";
    }
    const auto mock = predict::build_mock_table(text, per_entry);
    mock.save(out);
    std::cout << "wrote " << mock.size() << " entries to " << out << '\n';
    return 0;
}

int cmd_serve_mock(const std::string& table, const std::vector<std::string>& knowledge, const std::string& host,
                   int port) {
    predict::MockPredictor mock;
    if (!table.empty()) {
        require_file(table, "mock table");
        mock = predict::MockPredictor::load(table);
    } else {
        require(!knowledge.empty(), "serve-mock needs --table or --knowledge");
        std::string text;
        for (const auto& f : knowledge) {
            require_file(f, "knowledge file");
            text += run::read_text(f) + "\n";
        }
        mock = predict::build_mock_table(text);
    }
    httplib::Server server;
    predict::mount_predictor(server, mock);
    std::cerr << "serving POST /complete on http://" << host << ':' << port << '\n';
    if (!server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"P300 speller simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(run::kToolVersion));

    Overrides o;
    auto* show_config = app.add_subcommand("show-config", "print the resolved configuration as JSON");
    add_common_flags(show_config, o);

    auto* build_lm = app.add_subcommand("build-lm", "count n-gram tables from a corpus");
    add_common_flags(build_lm, o);

    auto* gen_cohort = app.add_subcommand("gen-cohort", "draw a synthetic cohort of labelled flash features");
    add_common_flags(gen_cohort, o);

    std::optional<std::string> condition;
    std::optional<int> trace_subject;
    auto* simulate = app.add_subcommand("simulate", "simulate every subject under one condition");
    add_common_flags(simulate, o);
    simulate->add_option("--condition", condition, "scheme[+predictor], e.g. diagonal+layered");
    simulate->add_option("--scheme", o.scheme, "random, deterministic, frequency_sorted, diagonal, huffman");
    simulate->add_option("--predictor", o.predictor, "none, trellis, layered");
    simulate->add_option("--trace-subject", trace_subject, "write a per-flash trace for this subject");

    auto* compare = app.add_subcommand("compare", "compare conditions over a cohort");
    add_common_flags(compare, o);
    compare->add_option("--conditions", o.conditions, "conditions, e.g. random diagonal diagonal+layered");

    std::string results_dir;
    std::optional<std::string> report_out;
    auto* report = app.add_subcommand("report", "violin data and tests from a results directory");
    report->add_option("results", results_dir, "directory holding results.csv")->required();
    report->add_option("-o,--out", report_out, "output directory (default: RESULTS/report)");

    std::vector<std::string> knowledge;
    std::string table_out;
    int per_entry = predict::kMaxSuggestions;
    auto* mock_table = app.add_subcommand("mock-table", "build a mock predictor table from text");
    mock_table->add_option("--knowledge", knowledge, "text files the mock draws on")->required();
    mock_table->add_option("-o,--out", table_out, "table file (JSON lines)")->required();
    mock_table->add_option("--per-entry", per_entry, "suggestions per entry");

    std::string serve_table, host = "127.0.0.1";
    int port = 8080;
    if (const char* env = std::getenv("P300SIM_MOCK_PORT"); env && *env) port = std::atoi(env);
    auto* serve = app.add_subcommand("serve-mock", "serve a mock predictor over HTTP");
    serve->add_option("--table", serve_table, "saved mock table");
    serve->add_option("--knowledge", knowledge, "text files to build the table from");
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "port (default $P300SIM_MOCK_PORT or 8080)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    try {
        if (*show_config) {
            std::cout << run::to_json(resolve(o)).dump(2) << '\n';
            return 0;
        }
        if (*build_lm) return cmd_build_lm(o);
        if (*gen_cohort) return cmd_gen_cohort(o);
        if (*simulate) return cmd_simulate(o, condition, trace_subject);
        if (*compare) return cmd_compare(o);
        if (*report) return cmd_report(results_dir, report_out);
        if (*mock_table) return cmd_mock_table(knowledge, table_out, per_entry);
        if (*serve) return cmd_serve_mock(serve_table, knowledge, host, port);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
