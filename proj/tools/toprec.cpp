// Command-line front end: prepare / train / evaluate / ablate / predict /
// serve over the toprec library.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "toprec/bundle.hpp"
#include "toprec/github.hpp"
#include "toprec/pipeline.hpp"
#include "toprec/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitModel = 3;

// JSON config file; command-line flags win over config values.
struct ConfigFile {
    json j = json::object();

    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw toprec::DataError("cannot open config " + path);
        j = json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw toprec::DataError("config " + path + ": expected a JSON object");
    }

    template <typename T>
    void apply(const CLI::Option* opt, const char* key, T& value) const {
        if (opt->count() == 0 && j.contains(key)) value = j[key].get<T>();
    }
};

toprec::MappingMode parse_mapping(const std::string& s) {
    if (s == "exact" || s == "exact_only") return toprec::MappingMode::exact_only;
    if (s == "heuristics" || s == "with_heuristics")
        return toprec::MappingMode::with_heuristics;
    throw toprec::DataError("unknown mapping mode: " + s);
}

toprec::FeatureMode parse_feature_mode(const std::string& s) {
    if (s == "unified") return toprec::FeatureMode::unified;
    if (s == "separate") return toprec::FeatureMode::separate;
    throw toprec::DataError("unknown feature mode: " + s);
}

toprec::ClassifierKind parse_kind(const std::string& s) {
    if (s == "logistic") return toprec::ClassifierKind::logistic;
    if (s == "mnb") return toprec::ClassifierKind::mnb;
    throw toprec::DataError("unknown classifier kind: " + s);
}

std::pair<std::string, int> parse_listen(const std::string& s) {
    auto colon = s.rfind(':');
    if (colon == std::string::npos)
        throw toprec::DataError("--listen expects host:port, got " + s);
    return {s.substr(0, colon), std::stoi(s.substr(colon + 1))};
}

toprec::SourceSelection sources_from_names(const std::vector<std::string>& names) {
    toprec::SourceSelection sel{false, false, false, false, false};
    for (const auto& n : names) {
        if (n == "name") sel.name = true;
        else if (n == "description") sel.description = true;
        else if (n == "readme") sel.readme = true;
        else if (n == "wiki") sel.wiki = true;
        else if (n == "filenames") sel.filenames = true;
        else if (n == "all") sel = {true, true, true, true, true};
        else throw toprec::DataError("unknown source: " + n);
    }
    return sel;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Featured-topic recommendation for software repositories"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags take precedence)");

    // ---- prepare ----
    auto* prepare = app.add_subcommand("prepare", "Filter, preprocess and split a corpus");
    std::string in_path, topics_path, tables_dir = "data", out_dir;
    toprec::PrepareConfig pcfg;
    std::string mapping_str = "heuristics";
    prepare->add_option("--input", in_path, "Corpus JSONL file")->required();
    prepare->add_option("--topics", topics_path, "Topic vocabulary JSON")->required();
    auto* opt_tables = prepare->add_option("--tables", tables_dir, "Preprocessing tables directory");
    prepare->add_option("--out", out_dir, "Output dataset directory")->required();
    auto* opt_seed_p = prepare->add_option("--seed", pcfg.seed, "Split seed");
    auto* opt_min_stars = prepare->add_option("--min-stars", pcfg.filter.min_stars);
    auto* opt_min_support = prepare->add_option("--min-support", pcfg.min_support);
    auto* opt_top_k = prepare->add_option("--top-k", pcfg.top_k, "Keep only the k most frequent topics");
    auto* opt_mapping = prepare->add_option("--mapping", mapping_str, "exact|heuristics");
    auto* opt_text_freq = prepare->add_option("--min-text-freq", pcfg.token_filter.min_text_freq);
    auto* opt_name_freq = prepare->add_option("--min-name-freq", pcfg.token_filter.min_name_freq);
    prepare->add_flag("--prune-corpus-wide",
                      [&pcfg](std::int64_t) { pcfg.prune_on_train_only = false; },
                      "Count prune frequencies over the full corpus (default: train only)");

    // ---- train ----
    auto* train = app.add_subcommand("train", "Train a model on a prepared dataset");
    std::string data_dir, model_dir, kind_str = "logistic", feature_mode_str = "unified";
    toprec::TrainConfig tcfg;
    std::size_t max_features = 20000;
    toprec::FeatureSpaceConfig fscfg;
    bool no_class_weights = false;
    train->add_option("--data", data_dir, "Prepared dataset directory")->required();
    train->add_option("--model-dir", model_dir, "Bundle output directory")->required();
    auto* opt_kind = train->add_option("--kind", kind_str, "logistic|mnb");
    auto* opt_lr = train->add_option("--learning-rate", tcfg.learning_rate);
    auto* opt_iters = train->add_option("--max-iters", tcfg.max_iters);
    auto* opt_l2 = train->add_option("--l2", tcfg.l2);
    auto* opt_tol = train->add_option("--tol", tcfg.tol);
    auto* opt_seed_t = train->add_option("--seed", tcfg.seed);
    auto* opt_maxf = train->add_option("--max-features", max_features);
    auto* opt_fmode = train->add_option("--feature-mode", feature_mode_str, "unified|separate");
    auto* opt_text_maxf = train->add_option("--text-max-features", fscfg.text_max_features);
    auto* opt_name_maxf = train->add_option("--name-max-features", fscfg.name_max_features);
    train->add_flag("--no-class-weights", no_class_weights);
    std::string train_tables_dir = "data";
    train->add_option("--tables", train_tables_dir, "Tables directory to snapshot into the bundle");

    // ---- evaluate ----
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a bundle on a dataset split");
    std::string eval_model_dir, eval_data_dir, eval_split = "test", eval_out;
    evaluate->add_option("--model-dir", eval_model_dir)->required();
    evaluate->add_option("--data", eval_data_dir)->required();
    evaluate->add_option("--split", eval_split, "test|validation|train");
    evaluate->add_option("--out", eval_out, "Write the JSON report here as well");

    // ---- ablate ----
    auto* ablate = app.add_subcommand("ablate", "Run an ablation plan");
    std::string abl_data_dir, plan_path, abl_out;
    toprec::TrainConfig abl_tcfg;
    std::size_t abl_maxf = 20000;
    ablate->add_option("--data", abl_data_dir)->required();
    ablate->add_option("--plan", plan_path, "Plan JSON file")->required();
    ablate->add_option("--out", abl_out, "CSV output path (default stdout)");
    ablate->add_option("--max-iters", abl_tcfg.max_iters);
    ablate->add_option("--max-features", abl_maxf);

    // ---- predict ----
    auto* predict = app.add_subcommand("predict", "Recommend topics for one repository");
    std::string pred_model_dir, repo_file, repo_name;
    std::size_t pred_n = 5;
    predict->add_option("--model-dir", pred_model_dir)->required();
    predict->add_option("--repo-file", repo_file, "RepoRecord JSON file");
    predict->add_option("--repo", repo_name, "owner/name to fetch remotely");
    predict->add_option("--n", pred_n, "Number of recommendations");

    // ---- serve ----
    auto* serve = app.add_subcommand("serve", "Run the HTTP prediction service");
    std::string srv_model_dir, listen = "127.0.0.1:8080";
    bool enable_fetch = false;
    serve->add_option("--model-dir", srv_model_dir)->required();
    serve->add_option("--listen", listen, "host:port");
    serve->add_flag("--enable-fetch", enable_fetch, "Enable GET /api/v1/predict-repo");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        ConfigFile cfg;
        if (!config_path.empty()) cfg.load(config_path);

        if (*prepare) {
            cfg.apply(opt_seed_p, "seed", pcfg.seed);
            cfg.apply(opt_min_stars, "min_stars", pcfg.filter.min_stars);
            cfg.apply(opt_min_support, "min_support", pcfg.min_support);
            cfg.apply(opt_top_k, "top_k", pcfg.top_k);
            cfg.apply(opt_mapping, "mapping", mapping_str);
            cfg.apply(opt_text_freq, "min_text_freq", pcfg.token_filter.min_text_freq);
            cfg.apply(opt_name_freq, "min_name_freq", pcfg.token_filter.min_name_freq);
            cfg.apply(opt_tables, "tables", tables_dir);
            pcfg.mapping = parse_mapping(mapping_str);

            std::ifstream in(in_path);
            if (!in) throw toprec::DataError("cannot open " + in_path);
            auto records = toprec::parse_corpus(in);
            auto vocab = toprec::load_vocabulary(topics_path);
            auto tables = toprec::load_tables(tables_dir);
            auto ds = toprec::prepare_dataset(records, vocab, tables, pcfg);
            toprec::save_dataset(ds, out_dir);
            std::cout << "prepared " << ds.docs.size() << " repositories, "
                      << ds.vocab.size() << " topics -> " << out_dir << "\n";
        } else if (*train) {
            cfg.apply(opt_kind, "kind", kind_str);
            cfg.apply(opt_lr, "learning_rate", tcfg.learning_rate);
            cfg.apply(opt_iters, "max_iters", tcfg.max_iters);
            cfg.apply(opt_l2, "l2", tcfg.l2);
            cfg.apply(opt_tol, "tol", tcfg.tol);
            cfg.apply(opt_seed_t, "seed", tcfg.seed);
            cfg.apply(opt_maxf, "max_features", max_features);
            cfg.apply(opt_fmode, "feature_mode", feature_mode_str);
            cfg.apply(opt_text_maxf, "text_max_features", fscfg.text_max_features);
            cfg.apply(opt_name_maxf, "name_max_features", fscfg.name_max_features);

            auto kind = parse_kind(kind_str);
            fscfg.mode = parse_feature_mode(feature_mode_str);
            tcfg.use_class_weights =
                !no_class_weights && kind == toprec::ClassifierKind::logistic;

            auto ds = toprec::load_dataset(data_dir);
            auto tr = toprec::train_on_dataset(ds, kind, tcfg, fscfg, max_features);
            toprec::ModelBundle bundle;
            bundle.created_at = toprec::now_iso8601();
            bundle.seed = tcfg.seed;
            bundle.topics = ds.vocab;
            bundle.features = std::move(tr.features);
            bundle.model = std::move(tr.model);
            bundle.tables = toprec::load_tables(train_tables_dir);
            auto manifest = toprec::save_model(bundle, model_dir);
            std::cout << "trained " << kind_str << " in " << tr.train_seconds
                      << "s -> " << manifest.string() << "\n";
        } else if (*evaluate) {
            auto bundle = toprec::load_model(eval_model_dir);
            auto ds = toprec::load_dataset(eval_data_dir);
            if (bundle.topics.topics != ds.vocab.topics)
                throw toprec::ModelError("bundle and dataset topic vocabularies differ");
            const auto& rows_idx = eval_split == "train" ? ds.split.train
                                   : eval_split == "validation" ? ds.split.validation
                                                                : ds.split.test;
            toprec::TrainResult tr;
            tr.features = bundle.features;
            tr.model = bundle.model;
            auto rep = toprec::evaluate_on_split(tr, ds, rows_idx);
            std::string out = toprec::report_to_json(rep).dump(2);
            std::cout << out << "\n" << toprec::report_to_text(rep);
            if (!eval_out.empty()) std::ofstream(eval_out) << out;
        } else if (*ablate) {
            auto ds = toprec::load_dataset(abl_data_dir);
            std::ifstream in(plan_path);
            if (!in) throw toprec::DataError("cannot open plan " + plan_path);
            json plan_json = json::parse(in);
            std::vector<toprec::AblationRow> plan;
            for (const auto& row : plan_json) {
                toprec::AblationRow r;
                r.name = row.at("name").get<std::string>();
                if (row.contains("sources"))
                    r.sources = sources_from_names(
                        row["sources"].get<std::vector<std::string>>());
                r.top_k = row.value("top_k", std::size_t{0});
                if (row.contains("feature_mode"))
                    r.feature_cfg.mode = parse_feature_mode(row["feature_mode"]);
                if (row.contains("kind")) r.kind = parse_kind(row["kind"]);
                plan.push_back(std::move(r));
            }
            auto results = toprec::ablation(ds, plan, abl_tcfg, abl_maxf);
            std::string csv = toprec::ablation_to_csv(results);
            if (abl_out.empty()) std::cout << csv;
            else std::ofstream(abl_out) << csv;
        } else if (*predict) {
            auto bundle = toprec::load_model(pred_model_dir);
            toprec::RepoRecord r;
            if (!repo_file.empty()) {
                std::ifstream in(repo_file);
                if (!in) throw toprec::DataError("cannot open " + repo_file);
                r = toprec::record_from_json(json::parse(in));
            } else if (!repo_name.empty()) {
                toprec::FetchConfig fcfg;
                if (const char* tok = std::getenv("GITHUB_TOKEN")) fcfg.token = tok;
                r = toprec::fetch_repo(repo_name, fcfg);
            } else {
                throw toprec::DataError("predict needs --repo-file or --repo");
            }
            toprec::PredictRequest req;
            req.name = r.full_name;
            req.description = r.description;
            req.readme = r.readme;
            req.wiki = r.wiki;
            req.file_names = r.file_paths;
            req.n = pred_n;
            auto resp = toprec::run_predict(bundle, req);
            for (const auto& [topic, score] : resp.recommendations.items)
                std::cout << topic << "\t" << score << "\n";
        } else if (*serve) {
            auto bundle = std::make_shared<toprec::ModelBundle>(
                toprec::load_model(srv_model_dir));
            toprec::PredictionServer server;
            server.load(bundle);
            if (enable_fetch) {
                toprec::FetchConfig fcfg;
                if (const char* tok = std::getenv("GITHUB_TOKEN")) fcfg.token = tok;
                server.enable_remote_fetch(std::move(fcfg));
            }
            auto [host, port] = parse_listen(listen);
            std::cerr << "listening on " << host << ":" << port << "\n";
            if (!server.listen(host, port))
                throw toprec::Error("failed to bind " + listen);
        }
    } catch (const toprec::ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitModel;
    } catch (const toprec::UpstreamError& e) {
        std::cerr << "upstream error: " << e.what() << "\n";
        return kExitData;
    } catch (const toprec::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
