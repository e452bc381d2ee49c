// seamkit command-line front end.
//
// Exit codes: 0 success, 2 input error (missing or unparsable files, bad
// arguments or config), 3 pipeline error (a stage failed on valid input).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "seamkit/seamkit.hpp"

namespace fs = std::filesystem;
using namespace seamkit;
using ojson = nlohmann::ordered_json;

namespace {

class InputError : public Error {
public:
    using Error::Error;
};

std::string read_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <typename F>
auto parse_input(const std::string& path, F&& parse) {
    const auto text = read_input(path);
    try {
        return parse(text);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path + ": " + std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
    }
}

IndexedMesh read_mesh(const std::string& path) {
    return parse_input(path, [](const std::string& t) { return load_obj(t); });
}

SeamSet read_seams(const std::string& path) {
    return parse_input(path, [](const std::string& t) { return parse_seams(t); });
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

// Output files are collected in memory and written together once every
// stage has succeeded, so a failing command leaves nothing behind.
class Outputs {
public:
    void add(const std::string& path, std::string content) { files_.emplace_back(path, std::move(content)); }

    void commit(RunManifest* manifest, const std::string& manifest_path) {
        for (const auto& [path, content] : files_) {
            const auto parent = fs::path(path).parent_path();
            if (!parent.empty()) fs::create_directories(parent);
            write_file_atomic(path, content);
            if (manifest) manifest->outputs.push_back(path);
        }
        if (manifest && !manifest_path.empty()) write_file_atomic(manifest_path, dump(manifest->to_json()));
    }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

RunConfig read_config(const std::string& path, const std::vector<std::string>& keys) {
    auto rc = parse_input(path, [](const std::string& t) { return RunConfig::parse(t); });
    rc.require_known(keys);
    return rc;
}

std::vector<std::string> with_model_keys(std::vector<std::string> keys) {
    keys.insert(keys.end(), model_config_keys().begin(), model_config_keys().end());
    return keys;
}

ojson metrics_json(const SeamMetrics& m, bool with_runtime) {
    auto j = metrics_to_json(m);
    if (!with_runtime) j.erase("runtime_s");
    return j;
}

void warn_skipped(const std::vector<ProjectionDiagnostic>& skipped) {
    for (const auto& d : skipped) std::cerr << "warning: segment " << d.segment << " skipped: " << d.message << "\n";
}

std::uint64_t seed_from(const RunConfig& rc, const std::optional<std::uint64_t>& flag) {
    return flag ? *flag : rc.get_u64("seed", 0);
}

ToyModel read_checkpoint(const std::string& path) {
    const auto bytes = read_input(path);
    try {
        return load_checkpoint(bytes);
    } catch (const Error& e) {
        throw InputError(path + ": " + e.what());
    }
}

PreparedCondition condition_for(const IndexedMesh& mesh, std::size_t points, std::uint64_t seed,
                                const ModelConfig& cfg) {
    const auto normalized = normalize(mesh).first;
    return prepare_condition(sample_conditioning(normalized, points, points, seed), cfg);
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string mesh, seams, json_out, svg, atlas_obj, seams_out, manifest;
    bool from_uv = false;
};

int cmd_evaluate(const EvaluateArgs& a) {
    Stopwatch sw;
    RunManifest man{"evaluate", {a.mesh}, "", 0, {}, {}};
    const auto mesh = read_mesh(a.mesh);
    Evaluation ev;
    if (a.from_uv) {
        if (!mesh.has_uv()) throw InputError(a.mesh + ": --from-uv needs texture coordinates (vt)");
        const auto edges = extract_uv_seams(mesh);
        man.timings.emplace_back("load", sw.lap());
        ev = evaluate_edges_full(mesh, edges);
    } else {
        if (a.seams.empty()) throw InputError("evaluate needs a seam file or --from-uv");
        const auto seams = read_seams(a.seams);
        man.inputs.push_back(a.seams);
        man.timings.emplace_back("load", sw.lap());
        ev = evaluate_full(mesh, seams);
        warn_skipped(ev.skipped_segments);
    }
    man.timings.emplace_back("evaluate", sw.lap());

    auto j = metrics_json(ev.metrics, true);
    j["seam_edges"] = ev.seam_edges.size();
    std::size_t non_disk = 0;
    for (const auto& d : ev.atlas.islands) non_disk += d.non_disk ? 1 : 0;
    j["non_disk_islands"] = non_disk;
    j["skipped_segments"] = ev.skipped_segments.size();

    Outputs out;
    if (!a.json_out.empty()) {
        out.add(a.json_out, dump(j));
    } else {
        std::cout << dump(j);
    }
    if (!a.svg.empty()) out.add(a.svg, atlas_to_svg(ev.atlas));
    if (!a.atlas_obj.empty()) out.add(a.atlas_obj, atlas_to_obj(mesh, ev.atlas));
    if (!a.seams_out.empty()) out.add(a.seams_out, format_seam_edges(ev.seam_edges));
    out.commit(&man, a.manifest);
    return 0;
}

int cmd_tokenize(const std::string& in, const std::string& out_path, const std::string& manifest) {
    const auto seams = read_seams(in);
    TokenSequence tokens;
    try {
        tokens = encode(canonicalize(seams));
    } catch (const RangeError& e) {
        throw InputError(in + ": " + e.what());
    }
    RunManifest man{"tokenize", {in}, "", 0, {}, {}};
    Outputs out;
    out.add(out_path, format_tokens(tokens));
    out.commit(&man, manifest);
    return 0;
}

int cmd_detokenize(const std::string& in, const std::string& out_path, const std::string& manifest) {
    const auto tokens = parse_input(in, [](const std::string& t) { return parse_tokens(t); });
    SeamSet seams;
    try {
        seams = decode(tokens);
    } catch (const MalformedSequenceError& e) {
        throw InputError(in + ": " + e.what());
    }
    RunManifest man{"detokenize", {in}, "", 0, {}, {}};
    Outputs out;
    out.add(out_path, format_seams(seams));
    out.commit(&man, manifest);
    return 0;
}

int cmd_project(const std::string& mesh_path, const std::string& seam_path, const std::string& out_path,
                const std::string& manifest) {
    const auto mesh = read_mesh(mesh_path);
    const auto seams = read_seams(seam_path);
    Stopwatch sw;
    const auto normalized = normalize(mesh).first;
    const auto result = project_seams(normalized, seams);
    warn_skipped(result.skipped);
    RunManifest man{"project", {mesh_path, seam_path}, "", 0, {}, {{"project", sw.lap()}}};
    Outputs out;
    out.add(out_path, format_seam_edges(result.seams));
    out.commit(&man, manifest);
    return 0;
}

struct UnwrapArgs {
    std::string mesh, seams, edges, out, svg, manifest;
    bool from_uv = false;
};

int cmd_unwrap(const UnwrapArgs& a) {
    const auto mesh = read_mesh(a.mesh);
    RunManifest man{"unwrap", {a.mesh}, "", 0, {}, {}};
    Stopwatch sw;
    Evaluation ev;
    if (a.from_uv) {
        if (!mesh.has_uv()) throw InputError(a.mesh + ": --from-uv needs texture coordinates (vt)");
        ev = evaluate_edges_full(mesh, extract_uv_seams(mesh));
    } else if (!a.edges.empty()) {
        auto edges = parse_input(a.edges, [](const std::string& t) { return parse_seam_edges(t); });
        for (const auto& [k, _] : edges.edges) {
            if (k.b >= mesh.vertex_count()) throw InputError(a.edges + ": vertex index out of range");
        }
        man.inputs.push_back(a.edges);
        ev = evaluate_edges_full(mesh, edges);
    } else if (!a.seams.empty()) {
        man.inputs.push_back(a.seams);
        ev = evaluate_full(mesh, read_seams(a.seams));
        warn_skipped(ev.skipped_segments);
    } else {
        ev = evaluate_edges_full(mesh, SeamEdgeSet{});
    }
    man.timings.emplace_back("unwrap", sw.lap());
    for (const auto& d : ev.atlas.islands) {
        if (d.non_disk) std::cerr << "warning: island " << d.island << " is not a topological disk\n";
    }
    Outputs out;
    out.add(a.out, atlas_to_obj(mesh, ev.atlas));
    if (!a.svg.empty()) out.add(a.svg, atlas_to_svg(ev.atlas));
    out.commit(&man, a.manifest);
    return 0;
}

int cmd_sample_points(const std::string& mesh_path, std::size_t topo, std::size_t geom, std::uint64_t seed,
                      const std::string& prefix, const std::string& manifest) {
    const auto mesh = read_mesh(mesh_path);
    Stopwatch sw;
    const auto normalized = normalize(mesh).first;
    const auto clouds = sample_conditioning(normalized, topo, geom, seed);
    RunManifest man{"sample-points", {mesh_path}, "", seed, {}, {{"sample", sw.lap()}}};
    Outputs out;
    out.add(prefix + ".topo.xyz", format_xyz(clouds.topo_points));
    out.add(prefix + ".geom.xyz", format_xyz(clouds.geom_points));
    out.commit(&man, manifest);
    return 0;
}

// ---------------------------------------------------------------------------
// Config-driven commands. Each writes <out_dir>/manifest.json.

std::string out_dir_of(const RunConfig& rc) { return rc.get("out_dir"); }

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed_flag) {
    const auto rc = read_config(config_path,
                                with_model_keys({"meshes", "seams", "steps", "lr", "points", "seed", "out_dir", "checkpoint"}));
    const auto seed = seed_from(rc, seed_flag);
    const auto meshes = rc.get_list("meshes");
    const auto seam_files = rc.get_list("seams");
    if (meshes.empty() || meshes.size() != seam_files.size()) {
        throw ConfigError("'meshes' and 'seams' must list the same nonzero number of files");
    }
    const auto steps = rc.get_int("steps", 500);
    const double lr = rc.get_double("lr", 1e-3);
    const auto points = static_cast<std::size_t>(rc.get_int("points", 256));
    const auto dir = out_dir_of(rc);
    RunManifest man{"train", {config_path}, rc.hash(), seed, {}, {}};
    Stopwatch sw;

    ToyModel model = rc.has("checkpoint") ? read_checkpoint(rc.get("checkpoint")) : ToyModel(model_config_from(rc));
    if (rc.has("checkpoint")) man.inputs.push_back(rc.get("checkpoint"));
    std::vector<PreparedCondition> conds;
    std::vector<TokenSequence> tokens;
    for (std::size_t i = 0; i < meshes.size(); ++i) {
        const auto mesh = read_mesh(meshes[i]);
        const auto seams = read_seams(seam_files[i]);
        man.inputs.push_back(meshes[i]);
        man.inputs.push_back(seam_files[i]);
        conds.push_back(condition_for(mesh, points, seed, model.config()));
        try {
            tokens.push_back(encode(canonicalize(seams)));
        } catch (const RangeError& e) {
            throw InputError(seam_files[i] + ": " + e.what());
        }
    }
    std::vector<TrainingExample> batch;
    for (std::size_t i = 0; i < conds.size(); ++i) batch.push_back({&conds[i], tokens[i]});
    man.timings.emplace_back("prepare", sw.lap());

    AdamOptimizer opt;
    std::string log;
    for (long step = 0; step < steps; ++step) {
        const double loss = nll_train_step(model, opt, batch, lr);
        log += ojson{{"step", step}, {"loss", loss}}.dump() + "\n";
    }
    man.timings.emplace_back("train", sw.lap());
    Outputs out;
    out.add(dir + "/model.ckpt", save_checkpoint(model));
    out.add(dir + "/train_log.jsonl", log);
    out.commit(&man, dir + "/manifest.json");
    return 0;
}

int cmd_sample(const std::string& config_path, std::optional<std::uint64_t> seed_flag) {
    const auto rc = read_config(config_path, {"checkpoint", "mesh", "n", "temperature", "top_p", "max_segments",
                                              "points", "seed", "out_dir"});
    const auto seed = seed_from(rc, seed_flag);
    const auto mesh_path = rc.get("mesh");
    const auto ckpt_path = rc.get("checkpoint");
    const auto n = rc.get_int("n", 5);
    const auto points = static_cast<std::size_t>(rc.get_int("points", 256));
    const auto dir = out_dir_of(rc);
    if (n < 1) throw ConfigError("n must be at least 1");
    RunManifest man{"sample", {config_path, ckpt_path, mesh_path}, rc.hash(), seed, {}, {}};
    Stopwatch sw;
    const auto model = read_checkpoint(ckpt_path);
    const auto mesh = read_mesh(mesh_path);
    SamplingOptions opt;
    opt.temperature = rc.get_double("temperature", 1.0);
    opt.top_p = rc.get_double("top_p", 1.0);
    opt.max_segments = static_cast<int>(rc.get_int("max_segments", 0));
    if (!(opt.temperature > 0.0) || !(opt.top_p > 0.0 && opt.top_p <= 1.0)) {
        throw ConfigError("temperature must be positive and top_p in (0, 1]");
    }
    const auto prep = condition_for(mesh, points, seed, model.config());
    const Matrix cond = encode_condition(model, prep);
    man.timings.emplace_back("prepare", sw.lap());

    Outputs out;
    ojson listing;
    listing["mesh"] = mesh_path;
    listing["checkpoint"] = ckpt_path;
    listing["seed"] = seed;
    listing["points"] = points;
    listing["candidates"] = ojson::array();
    double sampling = 0.0, evaluating = 0.0;
    for (long k = 0; k < n; ++k) {
        opt.seed = seed + static_cast<std::uint64_t>(k) + 1;
        const auto r = sample(model, cond, opt);
        sampling += sw.lap();
        const auto seams = decode(r.tokens);
        const auto metrics = evaluate(mesh, seams);
        evaluating += sw.lap();
        const std::string name = "candidate_" + std::to_string(k) + ".seams";
        out.add(dir + "/" + name, format_seams(seams));
        listing["candidates"].push_back(ojson{{"index", k},
                                              {"seed", opt.seed},
                                              {"seams", name},
                                              {"segments", seams.size()},
                                              {"malformed", r.malformed},
                                              {"metrics", metrics_json(metrics, false)}});
    }
    man.timings.emplace_back("sample", sampling);
    man.timings.emplace_back("evaluate", evaluating);
    out.add(dir + "/candidates.json", dump(listing));
    out.commit(&man, dir + "/manifest.json");
    return 0;
}

int cmd_prefpairs(const std::string& config_path, std::optional<std::uint64_t> seed_flag) {
    const auto rc = read_config(config_path, {"candidates", "pairing", "out_dir", "seed"});
    const auto seed = seed_from(rc, seed_flag);
    const auto mode = [&] {
        try {
            return parse_pairing_mode(rc.get("pairing", "joint"));
        } catch (const ContractError& e) {
            throw ConfigError(e.what());
        }
    }();
    const auto dir = out_dir_of(rc);
    RunManifest man{"prefpairs", {config_path}, rc.hash(), seed, {}, {}};
    Stopwatch sw;
    std::string records;
    std::size_t total = 0;
    for (const auto& listing_path : rc.get_list("candidates")) {
        man.inputs.push_back(listing_path);
        const auto listing = parse_input(listing_path, [&](const std::string& t) {
            try {
                return nlohmann::json::parse(t);
            } catch (const nlohmann::json::exception& e) {
                throw InputError(listing_path + ": " + e.what());
            }
        });
        const auto base = fs::path(listing_path).parent_path();
        std::vector<SeamMetrics> metrics;
        std::vector<std::string> seam_paths;
        try {
            for (const auto& c : listing.at("candidates")) {
                metrics.push_back(metrics_from_json(c.at("metrics")));
                seam_paths.push_back((base / c.at("seams").get<std::string>()).string());
            }
        } catch (const nlohmann::json::exception& e) {
            throw InputError(listing_path + ": " + e.what());
        }
        if (metrics.size() < 2) {
            std::cerr << "warning: " << listing_path << " has fewer than two candidates\n";
            continue;
        }
        const auto pairs = build_pairs(metrics, mode);
        if (pairs.empty()) std::cerr << "note: no preference pairs from " << listing_path << "\n";
        for (const auto& p : pairs) {
            ojson r;
            r["mesh"] = listing.at("mesh");
            r["seed"] = listing.at("seed");
            r["points"] = listing.at("points");
            r["checkpoint"] = listing.value("checkpoint", "");
            r["positive"] = p.positive;
            r["negative"] = p.negative;
            r["positive_seams"] = seam_paths[p.positive];
            r["negative_seams"] = seam_paths[p.negative];
            r["positive_metrics"] = metrics_json(metrics[p.positive], false);
            r["negative_metrics"] = metrics_json(metrics[p.negative], false);
            r["pairing"] = to_string(mode);
            records += r.dump() + "\n";
            ++total;
        }
    }
    std::cerr << total << " preference pairs\n";
    man.timings.emplace_back("pairs", sw.lap());
    Outputs out;
    out.add(dir + "/pairs.jsonl", records);
    out.commit(&man, dir + "/manifest.json");
    return 0;
}

int cmd_dpo(const std::string& config_path, std::optional<std::uint64_t> seed_flag) {
    const auto rc = read_config(config_path, {"checkpoint", "pairs", "beta", "lr", "steps", "optimizer", "out_dir", "seed"});
    const auto seed = seed_from(rc, seed_flag);
    const auto ckpt_path = rc.get("checkpoint");
    const auto pairs_path = rc.get("pairs");
    const auto dir = out_dir_of(rc);
    DpoConfig dc;
    dc.beta = rc.get_double("beta", dc.beta);
    dc.learning_rate = rc.get_double("lr", dc.learning_rate);
    dc.steps = static_cast<int>(rc.get_int("steps", dc.steps));
    const auto optimizer = rc.get("optimizer", "adam");
    if (optimizer != "adam" && optimizer != "sgd") throw ConfigError("optimizer must be adam or sgd");
    dc.use_adam = optimizer == "adam";
    if (!(dc.beta > 0.0)) throw ConfigError("beta must be positive");
    if (dc.steps < 0) throw ConfigError("steps must be non-negative");
    RunManifest man{"dpo", {config_path, ckpt_path, pairs_path}, rc.hash(), seed, {}, {}};
    Stopwatch sw;

    const auto ckpt_bytes = read_input(ckpt_path);
    const ToyModel reference = read_checkpoint(ckpt_path);
    ToyModel policy = reference;

    // Conditions are shared between pairs drawn from the same mesh and seed.
    std::map<std::string, std::unique_ptr<PreparedCondition>> conds;
    std::map<std::string, IndexedMesh> meshes;
    std::vector<PreferencePair> dataset;
    const auto text = read_input(pairs_path);
    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto r = nlohmann::json::parse(line);
            const auto mesh_path = r.at("mesh").get<std::string>();
            const auto pair_seed = r.at("seed").get<std::uint64_t>();
            const auto points = r.at("points").get<std::size_t>();
            const auto key = mesh_path + "#" + std::to_string(pair_seed) + "#" + std::to_string(points);
            if (!conds.count(key)) {
                if (!meshes.count(mesh_path)) meshes.emplace(mesh_path, read_mesh(mesh_path));
                conds.emplace(key, std::make_unique<PreparedCondition>(
                                       condition_for(meshes.at(mesh_path), points, pair_seed, reference.config())));
            }
            PreferencePair p;
            p.condition = conds.at(key).get();
            p.positive = read_seams(r.at("positive_seams").get<std::string>());
            p.negative = read_seams(r.at("negative_seams").get<std::string>());
            p.positive_metrics = metrics_from_json(r.at("positive_metrics"));
            p.negative_metrics = metrics_from_json(r.at("negative_metrics"));
            dataset.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw InputError(pairs_path + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    man.timings.emplace_back("prepare", sw.lap());

    std::string log;
    const auto report = dpo_train(policy, reference, dataset, dc, [&](const DpoLogEntry& e) {
        log += ojson{{"step", e.step}, {"loss", e.loss}, {"accuracy", e.accuracy}}.dump() + "\n";
    });
    man.timings.emplace_back("dpo", sw.lap());
    if (save_checkpoint(reference) != ckpt_bytes) throw Error("reference checkpoint changed during training");

    ojson summary;
    summary["pairs"] = dataset.size();
    summary["steps"] = dc.steps;
    summary["beta"] = dc.beta;
    summary["final_loss"] = report.final_loss;
    summary["final_accuracy"] = report.final_accuracy;
    Outputs out;
    // With no update the policy is the reference, byte for byte.
    out.add(dir + "/policy.ckpt", dataset.empty() || dc.steps == 0 ? ckpt_bytes : save_checkpoint(policy));
    out.add(dir + "/dpo_log.jsonl", log);
    out.add(dir + "/report.json", dump(summary));
    out.commit(&man, dir + "/manifest.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seamkit: seam evaluation, tokenization and desk-scale seam model training"};
    app.require_subcommand(1);

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Cut, unwrap and measure a seam set on a mesh");
    evaluate->add_option("mesh", ev.mesh, "OBJ mesh")->required();
    evaluate->add_option("seams", ev.seams, "Seam file in canonical coordinates");
    evaluate->add_flag("--from-uv", ev.from_uv, "Use the mesh's own UV seams");
    evaluate->add_option("--json-out", ev.json_out, "Write metrics JSON here instead of stdout");
    evaluate->add_option("--svg", ev.svg, "Write an SVG of the atlas");
    evaluate->add_option("--atlas-obj", ev.atlas_obj, "Write the atlas as OBJ with vt");
    evaluate->add_option("--seams-out", ev.seams_out, "Write the seam edges that were cut");
    evaluate->add_option("--manifest", ev.manifest, "Write a run manifest");

    std::string in, out, manifest, mesh_path, seam_path;
    auto* tokenize = app.add_subcommand("tokenize", "Seam file to token file");
    tokenize->add_option("seams", in)->required();
    tokenize->add_option("-o,--out", out)->required();
    tokenize->add_option("--manifest", manifest);

    auto* detokenize = app.add_subcommand("detokenize", "Token file to seam file");
    detokenize->add_option("tokens", in)->required();
    detokenize->add_option("-o,--out", out)->required();
    detokenize->add_option("--manifest", manifest);

    auto* project = app.add_subcommand("project", "Snap canonical seam segments onto mesh edges");
    project->add_option("mesh", mesh_path)->required();
    project->add_option("seams", seam_path)->required();
    project->add_option("-o,--out", out)->required();
    project->add_option("--manifest", manifest);

    UnwrapArgs uw;
    auto* unwrap = app.add_subcommand("unwrap", "Cut and flatten a mesh, write the atlas as OBJ");
    unwrap->add_option("mesh", uw.mesh)->required();
    unwrap->add_option("seams", uw.seams, "Seam file in canonical coordinates");
    unwrap->add_option("--edges", uw.edges, "Seam edge file (vertex pairs)");
    unwrap->add_flag("--from-uv", uw.from_uv);
    unwrap->add_option("-o,--out", uw.out)->required();
    unwrap->add_option("--svg", uw.svg);
    unwrap->add_option("--manifest", uw.manifest);

    std::size_t topo = kDeskCloudSize, geom = kDeskCloudSize;
    std::optional<std::uint64_t> seed;
    auto* points = app.add_subcommand("sample-points", "Write the topology and geometry conditioning clouds");
    points->add_option("mesh", mesh_path)->required();
    points->add_option("-o,--out", out, "Output prefix")->required();
    points->add_option("--topo", topo);
    points->add_option("--geom", geom);
    points->add_option("--seed", seed);
    points->add_option("--manifest", manifest);

    std::string config;
    std::vector<CLI::App*> config_cmds;
    for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
             {"train", "Next-token pretraining on meshes with known seams"},
             {"sample", "Sample candidate seams for one mesh and evaluate them"},
             {"prefpairs", "Build preference pairs from sampled candidates"},
             {"dpo", "Preference post-training of a checkpoint"}}) {
        auto* c = app.add_subcommand(name, help);
        c->add_option("--config", config, "key = value run configuration")->required();
        c->add_option("--seed", seed, "Overrides the config seed");
        config_cmds.push_back(c);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (evaluate->parsed()) return cmd_evaluate(ev);
        if (tokenize->parsed()) return cmd_tokenize(in, out, manifest);
        if (detokenize->parsed()) return cmd_detokenize(in, out, manifest);
        if (project->parsed()) return cmd_project(mesh_path, seam_path, out, manifest);
        if (unwrap->parsed()) return cmd_unwrap(uw);
        if (points->parsed()) return cmd_sample_points(mesh_path, topo, geom, seed.value_or(0), out, manifest);
        if (config_cmds[0]->parsed()) return cmd_train(config, seed);
        if (config_cmds[1]->parsed()) return cmd_sample(config, seed);
        if (config_cmds[2]->parsed()) return cmd_prefpairs(config, seed);
        if (config_cmds[3]->parsed()) return cmd_dpo(config, seed);
    } catch (const StageError& e) {
        std::cerr << "error in stage '" << e.stage() << "': " << e.what() << "\n";
        return 3;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const IndexError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const DegenerateInputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
