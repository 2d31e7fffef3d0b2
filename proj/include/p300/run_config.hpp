#pragma once
// One JSON document configures a whole run. Command-line flags patch it,
// and the final snapshot goes into the run manifest together with seeds
// and content hashes of every input and output file.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "p300/decoder.hpp"
#include "p300/eeg_sim.hpp"
#include "p300/error.hpp"
#include "p300/experiment.hpp"
#include "p300/lm.hpp"
#include "p300/sim.hpp"

namespace p300::run {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kPredictorUrlEnv = "P300SIM_PREDICTOR_URL";

struct RunConfig {
    std::uint64_t seed = 1;
    int workers = 1;

    // language
    std::string corpus = "data/corpus.txt";
    std::string lm_dir;  // saved count tables; used instead of the corpus when set
    std::string target = "data/doi.txt";
    int chars = 500;     // 0 keeps the whole target
    lm::SmoothingParams smoothing;

    // external predictor: URL, else a saved mock table, else a mock built
    // from the knowledge files
    std::string predictor_url;
    int predictor_timeout_ms = 200;
    std::string mock_table;
    std::vector<std::string> mock_knowledge{"data/corpus.txt", "data/doi.txt"};

    // cohort
    std::string features;  // labelled-feature CSV; a synthetic cohort is drawn when empty
    eeg::CohortParams cohort;
    std::vector<experiment::Training> trainings{experiment::Training::wscv};
    int folds = 3;
    eeg::ScoreMode score_mode = eeg::ScoreMode::gaussian;

    // simulation
    sim::SimConfig sim;
    std::vector<std::string> conditions{"random", "diagonal", "diagonal+layered"};
    std::string out_dir = "results";

    void validate() const {
        require(workers >= 1, "workers must be >= 1");
        require(chars >= 0, "chars must be >= 0");
        require(predictor_timeout_ms >= 1, "predictor timeout must be >= 1 ms");
        require(folds >= 2, "folds must be >= 2");
        require(!trainings.empty(), "at least one training mode is required");
        require(!out_dir.empty(), "output directory must be set");
        smoothing.validate();
        cohort.validate();
        sim.validate();
        for (const auto& c : conditions) experiment::parse_condition(c);
    }

    /// Seed of the synthetic cohort, a separate stream from the simulations.
    std::uint64_t cohort_seed() const { return sim::derive_seed(seed, {0xC0407ULL}); }
};

// ---------------------------------------------------------------------------
// JSON mapping

inline nlohmann::json to_json(const RunConfig& c) {
    std::vector<std::string> trainings;
    for (auto t : c.trainings) trainings.emplace_back(experiment::training_name(t));
    return {
        {"seed", c.seed},
        {"workers", c.workers},
        {"language",
         {{"corpus", c.corpus},
          {"lm_dir", c.lm_dir},
          {"target", c.target},
          {"chars", c.chars},
          {"smoothing", {{"d1", c.smoothing.d1}, {"d2", c.smoothing.d2}, {"d3", c.smoothing.d3}, {"d4", c.smoothing.d4}}}}},
        {"predictor",
         {{"url", c.predictor_url},
          {"timeout_ms", c.predictor_timeout_ms},
          {"mock_table", c.mock_table},
          {"mock_knowledge", c.mock_knowledge}}},
        {"cohort",
         {{"features", c.features},
          {"subjects", c.cohort.n_subjects},
          {"dprime_mean", c.cohort.dprime_mean},
          {"dprime_sd", c.cohort.dprime_sd},
          {"features_per_flash", c.cohort.n_features},
          {"chars", c.cohort.chars},
          {"sequences_per_char", c.cohort.sequences_per_char},
          {"clusters", c.cohort.clusters},
          {"major_cluster_share", c.cohort.major_cluster_share},
          {"template_jitter", c.cohort.template_jitter}}},
        {"training", {{"modes", trainings}, {"folds", c.folds}, {"score_mode", eeg::mode_name(c.score_mode)}}},
        {"sim",
         {{"scheme", board::scheme_name(c.sim.scheme)},
          {"predictor", sim::predictor_name(c.sim.predictor)},
          {"p_thresh", c.sim.decoder.p_thresh},
          {"max_sequences", c.sim.decoder.max_sequences},
          {"abandon_scans", c.sim.decoder.abandon_scans},
          {"check", decode::check_point_name(c.sim.decoder.check)},
          {"soa", c.sim.soa},
          {"pause", c.sim.pause},
          {"slot_mass", sim::slot_mass_name(c.sim.slot_mass)},
          {"suggestion_mass", c.sim.suggestion_mass},
          {"suggestions", c.sim.suggestions},
          {"backspace_mass", c.sim.prior.backspace_mass},
          {"uniform_floor", c.sim.prior.uniform_floor},
          {"trellis_max_len", c.sim.trellis.max_len},
          {"trellis_space_floor", c.sim.trellis.space_floor}}},
        {"conditions", c.conditions},
        {"out_dir", c.out_dir},
    };
}

namespace detail {

// Reads the keys of one object; finish() rejects keys that were never asked for.
class ObjectReader {
public:
    ObjectReader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
        require(j.is_object(), where_ + " must be a JSON object");
    }

    template <class T>
    void read(const std::string& key, T& dst) {
        seen_.push_back(key);
        if (!j_.contains(key)) return;
        try {
            dst = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where_ + "." + key + ": " + e.what());
        }
    }

    template <class T, class Parse>
    void read_as(const std::string& key, T& dst, Parse parse) {
        std::string s;
        read(key, s);
        if (j_.contains(key)) dst = parse(s);
    }

    std::optional<nlohmann::json> child(const std::string& key) {
        seen_.push_back(key);
        if (!j_.contains(key)) return std::nullopt;
        return j_.at(key);
    }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            require(std::find(seen_.begin(), seen_.end(), key) != seen_.end(),
                    "unknown config key " + where_ + "." + key);
    }

private:
    const nlohmann::json& j_;
    std::string where_;
    std::vector<std::string> seen_;
};

}  // namespace detail

/// Overlays the keys present in `j` onto `c`. Unknown keys are errors.
inline void apply_json(RunConfig& c, const nlohmann::json& j) {
    detail::ObjectReader top(j, "config");
    top.read("seed", c.seed);
    top.read("workers", c.workers);
    top.read("conditions", c.conditions);
    top.read("out_dir", c.out_dir);

    if (auto lang = top.child("language")) {
        detail::ObjectReader r(*lang, "language");
        r.read("corpus", c.corpus);
        r.read("lm_dir", c.lm_dir);
        r.read("target", c.target);
        r.read("chars", c.chars);
        if (auto sm = r.child("smoothing")) {
            detail::ObjectReader s(*sm, "language.smoothing");
            s.read("d1", c.smoothing.d1);
            s.read("d2", c.smoothing.d2);
            s.read("d3", c.smoothing.d3);
            s.read("d4", c.smoothing.d4);
            s.finish();
        }
        r.finish();
    }
    if (auto pred = top.child("predictor")) {
        detail::ObjectReader r(*pred, "predictor");
        r.read("url", c.predictor_url);
        r.read("timeout_ms", c.predictor_timeout_ms);
        r.read("mock_table", c.mock_table);
        r.read("mock_knowledge", c.mock_knowledge);
        r.finish();
    }
    if (auto co = top.child("cohort")) {
        detail::ObjectReader r(*co, "cohort");
        r.read("features", c.features);
        r.read("subjects", c.cohort.n_subjects);
        r.read("dprime_mean", c.cohort.dprime_mean);
        r.read("dprime_sd", c.cohort.dprime_sd);
        r.read("features_per_flash", c.cohort.n_features);
        r.read("chars", c.cohort.chars);
        r.read("sequences_per_char", c.cohort.sequences_per_char);
        r.read("clusters", c.cohort.clusters);
        r.read("major_cluster_share", c.cohort.major_cluster_share);
        r.read("template_jitter", c.cohort.template_jitter);
        r.finish();
    }
    if (auto tr = top.child("training")) {
        detail::ObjectReader r(*tr, "training");
        std::vector<std::string> modes;
        r.read("modes", modes);
        if (tr->contains("modes")) {
            c.trainings.clear();
            for (const auto& m : modes) c.trainings.push_back(experiment::parse_training(m));
        }
        r.read("folds", c.folds);
        r.read_as("score_mode", c.score_mode, eeg::parse_mode);
        r.finish();
    }
    if (auto s = top.child("sim")) {
        detail::ObjectReader r(*s, "sim");
        r.read_as("scheme", c.sim.scheme, board::parse_scheme);
        r.read_as("predictor", c.sim.predictor, sim::parse_predictor);
        r.read("p_thresh", c.sim.decoder.p_thresh);
        r.read("max_sequences", c.sim.decoder.max_sequences);
        r.read("abandon_scans", c.sim.decoder.abandon_scans);
        r.read_as("check", c.sim.decoder.check, decode::parse_check_point);
        r.read("soa", c.sim.soa);
        r.read("pause", c.sim.pause);
        r.read_as("slot_mass", c.sim.slot_mass, sim::parse_slot_mass);
        r.read("suggestion_mass", c.sim.suggestion_mass);
        r.read("suggestions", c.sim.suggestions);
        r.read("backspace_mass", c.sim.prior.backspace_mass);
        r.read("uniform_floor", c.sim.prior.uniform_floor);
        r.read("trellis_max_len", c.sim.trellis.max_len);
        r.read("trellis_space_floor", c.sim.trellis.space_floor);
        r.finish();
    }
    top.finish();
}

inline RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    require(static_cast<bool>(in), "config file not found: " + file.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(file.string() + ": " + e.what());
    }
    RunConfig c;
    apply_json(c, j);
    return c;
}

// ---------------------------------------------------------------------------
// Manifest

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex;
    s.width(16);
    s.fill('0');
    s << v;
    return s.str();
}

inline std::string read_text(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    require(static_cast<bool>(in), "file not found: " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string file_hash(const std::filesystem::path& file) { return hex64(fnv1a64(read_text(file))); }

/// Hash over a directory's regular files, visited in name order.
inline std::string dir_hash(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::uint64_t h = fnv1a64("");
    for (const auto& f : files) {
        h = fnv1a64(f.filename().string(), h);
        h = fnv1a64(read_text(f), h);
    }
    return hex64(h);
}

struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::map<std::string, std::uint64_t> seeds;
    std::map<std::string, std::string> inputs;   // path -> hash
    std::map<std::string, std::string> outputs;  // file name -> hash

    void add_input(const std::filesystem::path& p) {
        inputs[p.string()] = std::filesystem::is_directory(p) ? dir_hash(p) : file_hash(p);
    }

    /// Everything but the output hashes; embedded in JSON outputs.
    nlohmann::json header() const {
        return {{"tool", "p300sim"},
                {"version", kToolVersion},
                {"command", command},
                {"config", config},
                {"seeds", seeds},
                {"inputs", inputs}};
    }

    nlohmann::json to_json() const {
        auto j = header();
        j["outputs"] = outputs;
        return j;
    }
};

/// Writes `content` into `dir/name` and records its hash.
inline void write_output(RunManifest& m, const std::filesystem::path& dir, const std::string& name,
                         const std::string& content) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << content;
    out.close();
    m.outputs[name] = hex64(fnv1a64(content));
}

inline void write_manifest(const RunManifest& m, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
    out << m.to_json().dump(2) << '\n';
}

}  // namespace p300::run
