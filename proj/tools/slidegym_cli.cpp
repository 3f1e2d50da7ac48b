// slidegym command line: run episodes, evaluate agents over a brief
// catalog, export rollouts, serve the environment over HTTP, and drive
// the GRPO lab.

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "slidegym/grpo.hpp"
#include "slidegym/harness.hpp"

using namespace slidegym;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string briefs_path = "data/briefs";
    std::string weights_file;
    double w_code_rules = NAN;
    double w_render_quality = NAN;
    double w_aesthetic_html = NAN;
    double w_aesthetic_visual = NAN;
    double w_content_quality = NAN;
    double w_spec_reconstruction = NAN;
    std::string judge_mode;
    std::string judge_endpoint;
    std::string judge_cache;
    std::string judge_model;
    std::string renderer = "stub";
    std::string renderer_cmd;
};

void add_common_options(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--briefs", opts.briefs_path, "Brief file or directory")
        ->capture_default_str();
    cmd->add_option("--weights", opts.weights_file, "JSON file of component weight overrides");
    cmd->add_option("--weight-code_rules", opts.w_code_rules, "Override (default 1.0)");
    cmd->add_option("--weight-render_quality", opts.w_render_quality, "Override (default 2.0)");
    cmd->add_option("--weight-aesthetic_html", opts.w_aesthetic_html, "Override (default 1.5)");
    cmd->add_option("--weight-aesthetic_visual", opts.w_aesthetic_visual,
                    "Override (default 1.5)");
    cmd->add_option("--weight-content_quality", opts.w_content_quality, "Override (default 2.0)");
    cmd->add_option("--weight-spec_reconstruction", opts.w_spec_reconstruction,
                    "Override (default 2.0)");
    cmd->add_option("--judge-mode", opts.judge_mode, "offline or remote (default: JUDGE_MODE)")
        ->check(CLI::IsMember({"offline", "remote"}));
    cmd->add_option("--judge-endpoint", opts.judge_endpoint, "Remote judge URL");
    cmd->add_option("--judge-cache", opts.judge_cache, "Score cache path");
    cmd->add_option("--judge-model", opts.judge_model, "Judge model name");
    cmd->add_option("--renderer", opts.renderer, "stub or subprocess")
        ->check(CLI::IsMember({"stub", "subprocess"}))
        ->capture_default_str();
    cmd->add_option("--renderer-cmd", opts.renderer_cmd,
                    "Subprocess renderer command (html on stdin, PNG on stdout)");
}

ComponentWeights resolve_weights(const CommonOptions& opts) {
    ComponentWeights weights;
    if (!opts.weights_file.empty()) {
        std::ifstream in(opts.weights_file);
        if (!in) throw CLI::ValidationError("--weights", "cannot read " + opts.weights_file);
        const json doc = json::parse(in);
        weights.code_rules = doc.value("code_rules", weights.code_rules);
        weights.render_quality = doc.value("render_quality", weights.render_quality);
        weights.aesthetic_html = doc.value("aesthetic_html", weights.aesthetic_html);
        weights.aesthetic_visual = doc.value("aesthetic_visual", weights.aesthetic_visual);
        weights.content_quality = doc.value("content_quality", weights.content_quality);
        weights.spec_reconstruction = doc.value("spec_reconstruction", weights.spec_reconstruction);
    }
    if (!std::isnan(opts.w_code_rules)) weights.code_rules = opts.w_code_rules;
    if (!std::isnan(opts.w_render_quality)) weights.render_quality = opts.w_render_quality;
    if (!std::isnan(opts.w_aesthetic_html)) weights.aesthetic_html = opts.w_aesthetic_html;
    if (!std::isnan(opts.w_aesthetic_visual)) weights.aesthetic_visual = opts.w_aesthetic_visual;
    if (!std::isnan(opts.w_content_quality)) weights.content_quality = opts.w_content_quality;
    if (!std::isnan(opts.w_spec_reconstruction)) {
        weights.spec_reconstruction = opts.w_spec_reconstruction;
    }
    return weights;
}

EnvConfig build_env_config(const CommonOptions& opts) {
    JudgeConfig judge_config = JudgeConfig::from_env();
    if (!opts.judge_mode.empty()) {
        judge_config.mode = opts.judge_mode == "remote" ? JudgeConfig::Mode::Remote
                                                        : JudgeConfig::Mode::Offline;
    }
    if (!opts.judge_endpoint.empty()) judge_config.endpoint = opts.judge_endpoint;
    if (!opts.judge_cache.empty()) judge_config.cache_path = opts.judge_cache;
    if (!opts.judge_model.empty()) judge_config.model_name = opts.judge_model;

    EnvConfig env;
    env.judge = std::make_shared<JudgeGateway>(judge_config);
    env.weights = resolve_weights(opts);
    env.live_judge_q = judge_config.mode == JudgeConfig::Mode::Remote;
    if (opts.renderer == "subprocess") {
        if (opts.renderer_cmd.empty()) {
            throw CLI::ValidationError("--renderer", "subprocess renderer needs --renderer-cmd");
        }
        std::vector<std::string> argv;
        std::istringstream in(opts.renderer_cmd);
        std::string arg;
        while (in >> arg) argv.push_back(arg);
        env.png_renderer = std::make_shared<SubprocessPngRenderer>(argv);
    }
    return env;
}

void print_trajectory_summary(const Trajectory& t) {
    std::cout << "model=" << t.model_name << " brief=" << t.brief_id
              << " completed=" << (t.completed ? "yes" : "no") << " turns=" << t.turns_used
              << " slides=" << t.slides_created << " wall=" << t.wall_time_s << "s\n";
    const auto& b = t.final_breakdown;
    std::printf("  aggregate %.3f | code_rules %.3f render_quality %.3f aesthetic_html %.3f "
                "aesthetic_visual %.3f content_quality %.3f spec_reconstruction %.3f\n",
                b.aggregate, b.code_rules, b.render_quality, b.aesthetic_html, b.aesthetic_visual,
                b.content_quality, b.spec_reconstruction);
}

std::unique_ptr<Agent> make_agent(const std::string& kind, const SlideBrief& brief,
                                  const std::string& script_file, const std::string& endpoint,
                                  const std::string& model) {
    if (kind == "competent") {
        return std::make_unique<ScriptedAgent>("scripted-competent", competent_script(brief));
    }
    if (kind == "review-deck") {
        return std::make_unique<ScriptedAgent>("scripted-review-deck",
                                               review_deck_script(brief.targets.max_turns));
    }
    if (kind == "script") {
        std::ifstream in(script_file);
        if (!in) throw CLI::ValidationError("--script-file", "cannot read " + script_file);
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) lines.push_back(line);
        }
        return std::make_unique<ScriptedAgent>("scripted-file", std::move(lines));
    }
    if (kind == "remote") {
        RemoteAgentConfig config;
        config.endpoint = endpoint;
        config.model_name = model.empty() ? "remote" : model;
        return std::make_unique<RemoteAgent>(config);
    }
    throw CLI::ValidationError("--agent", "unknown agent kind: " + kind);
}

void print_windows(const std::vector<grpo::TrainRecord>& log, int window) {
    std::printf("Steps      Avg      Min      Max      Entropy  P(review_deck)\n");
    for (std::size_t begin = 0; begin < log.size(); begin += static_cast<std::size_t>(window)) {
        const std::size_t end = std::min(begin + static_cast<std::size_t>(window), log.size());
        double avg = 0.0, entropy = 0.0, p_review = 0.0;
        double min = log[begin].min, max = log[begin].max;
        for (std::size_t i = begin; i < end; ++i) {
            avg += log[i].avg;
            entropy += log[i].entropy;
            p_review += log[i].p_review_deck;
            min = std::min(min, log[i].min);
            max = std::max(max, log[i].max);
        }
        const double n = static_cast<double>(end - begin);
        std::printf("%4zu-%-5zu %+.3f   %+.3f   %+.3f   %.3f    %.3f\n", begin, end - 1, avg / n,
                    min, max, entropy / n, p_review / n);
    }
}

std::atomic<bool> g_stop{false};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slidegym: an RL environment for agentic slide-deck generation"};
    app.require_subcommand(1);

    // ---- run ----
    auto* run_cmd = app.add_subcommand("run", "Run one episode with an agent");
    CommonOptions run_opts;
    std::string run_brief_id, run_agent = "competent", run_script_file, run_endpoint, run_model;
    std::string run_out;
    add_common_options(run_cmd, run_opts);
    run_cmd->add_option("--brief", run_brief_id, "Brief id from the catalog")->required();
    run_cmd->add_option("--agent", run_agent, "competent | review-deck | script | remote")
        ->capture_default_str();
    run_cmd->add_option("--script-file", run_script_file, "Completions, one per line");
    run_cmd->add_option("--endpoint", run_endpoint, "Remote agent URL");
    run_cmd->add_option("--model", run_model, "Remote agent model name");
    run_cmd->add_option("--out", run_out, "Output directory for deck + trajectory");

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate agents over the catalog");
    CommonOptions eval_opts;
    std::string eval_agents = "competent";
    std::vector<std::string> eval_remote;
    std::string eval_report = "report.json", eval_out_dir;
    int eval_workers = static_cast<int>(std::thread::hardware_concurrency());
    add_common_options(eval_cmd, eval_opts);
    eval_cmd->add_option("--agents", eval_agents, "Comma list: competent, review-deck")
        ->capture_default_str();
    eval_cmd->add_option("--remote-agent", eval_remote,
                         "name=endpoint pairs for remote agents (repeatable)");
    eval_cmd->add_option("--out", eval_report, "Report JSON path")->capture_default_str();
    eval_cmd->add_option("--out-dir", eval_out_dir, "Directory for decks and rollouts.jsonl");
    eval_cmd->add_option("--workers", eval_workers, "Parallel episode workers");

    // ---- export-rollouts ----
    auto* export_cmd = app.add_subcommand("export-rollouts", "Merge trajectories into a JSONL");
    std::vector<std::string> export_inputs;
    std::string export_out = "rollouts.jsonl";
    export_cmd->add_option("--in", export_inputs, "trajectory.json files, rollout JSONLs, or dirs")
        ->required();
    export_cmd->add_option("--out", export_out, "Output JSONL path")->capture_default_str();

    // ---- serve ----
    auto* serve_cmd = app.add_subcommand("serve", "Serve the environment over HTTP");
    CommonOptions serve_opts;
    int serve_port = 8080, serve_idle = 600;
    bool serve_expose = false;
    add_common_options(serve_cmd, serve_opts);
    serve_cmd->add_option("--port", serve_port, "Listen port")->capture_default_str();
    serve_cmd->add_option("--idle-timeout", serve_idle, "Session eviction timeout (s)");
    serve_cmd->add_flag("--expose-rewards", serve_expose, "Include reward internals in /state");

    // ---- grpo-train ----
    auto* train_cmd = app.add_subcommand("grpo-train", "Train the toy policy with GRPO");
    CommonOptions train_opts;
    grpo::TrainOptions train_options;
    std::string train_signal = "env", train_log_path;
    int train_window = 50;
    add_common_options(train_cmd, train_opts);
    train_cmd->add_option("--steps", train_options.grpo.steps, "Training steps")
        ->capture_default_str();
    train_cmd->add_option("--k", train_options.grpo.k, "Completions per group")
        ->capture_default_str();
    train_cmd->add_option("--beta", train_options.grpo.beta, "KL coefficient")
        ->capture_default_str();
    train_cmd->add_option("--seed", train_options.grpo.seed, "RNG seed")->capture_default_str();
    train_cmd->add_option("--lr", train_options.grpo.learning_rate, "Learning rate")
        ->capture_default_str();
    train_cmd->add_option("--eps-clip", train_options.grpo.eps_clip, "Clip epsilon")
        ->capture_default_str();
    train_cmd->add_option("--groups", train_options.groups_per_step, "Groups per step")
        ->capture_default_str();
    train_cmd->add_option("--seq-len", train_options.seq_len, "Tokens per completion")
        ->capture_default_str();
    train_cmd->add_option("--slip", train_options.param_slip_prob, "Emission slip probability")
        ->capture_default_str();
    train_cmd->add_option("--review-decay", train_options.review_deck_decay,
                          "Per-use review_deck bonus decay")
        ->capture_default_str();
    train_cmd->add_option("--signal", train_signal, "env (step rewards) or completion (ladder)")
        ->check(CLI::IsMember({"env", "completion"}))
        ->capture_default_str();
    train_cmd->add_option("--log", train_log_path, "Write per-step JSONL records here");
    train_cmd->add_option("--window", train_window, "Summary window size")->capture_default_str();

    // ---- collapse ----
    auto* collapse_cmd = app.add_subcommand("collapse", "Reward-hacking collapse experiment");
    grpo::CollapseConfig collapse_config;
    bool collapse_mitigate = false;
    std::string collapse_log_path;
    collapse_cmd->add_option("--steps", collapse_config.grpo.steps, "Training steps")
        ->capture_default_str();
    collapse_cmd->add_option("--seed", collapse_config.grpo.seed, "RNG seed")
        ->capture_default_str();
    collapse_cmd->add_option("--lr", collapse_config.grpo.learning_rate, "Learning rate")
        ->capture_default_str();
    collapse_cmd->add_option("--window", collapse_config.window, "Summary window size")
        ->capture_default_str();
    collapse_cmd->add_option("--slip", collapse_config.param_slip_prob,
                             "Emission slip probability")
        ->capture_default_str();
    collapse_cmd->add_flag("--mitigate", collapse_mitigate,
                           "Give review_deck diminishing returns (decay 0.5)");
    collapse_cmd->add_option("--log", collapse_log_path, "Write per-step JSONL records here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            const BriefCatalog catalog = load_catalog(run_opts.briefs_path);
            const SlideBrief* brief = catalog.find(run_brief_id);
            if (!brief) {
                std::cerr << "unknown brief id: " << run_brief_id << "\n";
                return 1;
            }
            auto agent = make_agent(run_agent, *brief, run_script_file, run_endpoint, run_model);
            RunConfig config;
            config.env = build_env_config(run_opts);
            fs::path episode_dir;
            if (!run_out.empty()) {
                episode_dir = fs::path(run_out) / agent->name() / brief->id;
                config.export_dir = episode_dir;
            }
            const Trajectory trajectory = run_episode(*agent, *brief, config);
            print_trajectory_summary(trajectory);
            if (!run_out.empty()) {
                fs::create_directories(episode_dir);
                std::ofstream(episode_dir / "trajectory.json") << trajectory.to_json().dump(2)
                                                               << "\n";
                std::cout << "wrote " << (episode_dir / "trajectory.json").string() << "\n";
            }
            return 0;
        }

        if (*eval_cmd) {
            const BriefCatalog catalog = load_catalog(eval_opts.briefs_path);
            std::vector<AgentSpec> agents;
            std::istringstream list(eval_agents);
            std::string kind;
            while (std::getline(list, kind, ',')) {
                if (kind == "competent") agents.push_back(scripted_competent_spec());
                else if (kind == "review-deck") agents.push_back(scripted_review_deck_spec());
                else if (!kind.empty()) {
                    std::cerr << "unknown agent kind: " << kind << "\n";
                    return 1;
                }
            }
            for (const auto& spec : eval_remote) {
                const std::size_t eq = spec.find('=');
                if (eq == std::string::npos) {
                    std::cerr << "--remote-agent expects name=endpoint\n";
                    return 1;
                }
                const std::string name = spec.substr(0, eq);
                const std::string endpoint = spec.substr(eq + 1);
                agents.push_back({name, [name, endpoint](const SlideBrief&) {
                                      RemoteAgentConfig config;
                                      config.endpoint = endpoint;
                                      config.model_name = name;
                                      return std::make_unique<RemoteAgent>(config);
                                  }});
            }

            EvalConfig config;
            config.run.env = build_env_config(eval_opts);
            config.worker_threads = eval_workers;
            if (!eval_out_dir.empty()) config.run.export_dir = eval_out_dir;

            const EvalReport report = evaluate(agents, catalog, config);
            std::printf("%-24s %8s %11s %9s %10s %9s\n", "model", "quality", "completion",
                        "avg_turns", "avg_slides", "avg_time");
            for (const auto& a : report.agents) {
                std::printf("%-24s %8.3f %10.1f%% %9.1f %10.1f %8.2fs\n", a.model_name.c_str(),
                            a.overall_quality, 100.0 * a.completion_rate, a.avg_turns,
                            a.avg_slides, a.avg_time_s);
            }
            for (const auto& h : report.head_to_head) {
                std::printf("%s vs %s: %dW/%dT/%dL\n", h.agent_a.c_str(), h.agent_b.c_str(),
                            h.wins, h.ties, h.losses);
            }
            std::ofstream(eval_report) << report.to_json().dump(2) << "\n";
            std::cout << "wrote " << eval_report << "\n";
            if (!eval_out_dir.empty()) {
                const fs::path rollouts =
                    export_rollouts(report.trajectories, fs::path(eval_out_dir) / "rollouts.jsonl");
                std::cout << "wrote " << rollouts.string() << "\n";
            }
            return 0;
        }

        if (*export_cmd) {
            std::vector<Trajectory> trajectories;
            std::function<void(const fs::path&)> collect = [&](const fs::path& path) {
                if (fs::is_directory(path)) {
                    std::vector<fs::path> children;
                    for (const auto& entry : fs::directory_iterator(path)) {
                        children.push_back(entry.path());
                    }
                    std::sort(children.begin(), children.end());
                    for (const auto& child : children) collect(child);
                    return;
                }
                if (path.filename() == "trajectory.json") {
                    std::ifstream in(path);
                    trajectories.push_back(Trajectory::from_json(json::parse(in)));
                } else if (path.extension() == ".jsonl") {
                    auto imported = import_rollouts(path);
                    trajectories.insert(trajectories.end(), imported.begin(), imported.end());
                }
            };
            for (const auto& input : export_inputs) collect(input);
            export_rollouts(trajectories, export_out);
            std::cout << "wrote " << trajectories.size() << " trajectories to " << export_out
                      << "\n";
            return 0;
        }

        if (*serve_cmd) {
            ServiceConfig config;
            config.port = serve_port;
            config.idle_timeout_s = serve_idle;
            config.expose_rewards = serve_expose;
            config.catalog = load_catalog(serve_opts.briefs_path);
            config.env = build_env_config(serve_opts);
            EnvService service(config);
            if (!service.start()) {
                std::cerr << "cannot bind port " << serve_port << "\n";
                return 1;
            }
            std::cout << "serving " << config.catalog.briefs.size() << " briefs on port "
                      << serve_port << " (POST /reset, POST /step, GET /state/<id>)\n";
            std::signal(SIGINT, [](int) { g_stop = true; });
            std::signal(SIGTERM, [](int) { g_stop = true; });
            while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            service.stop();
            return 0;
        }

        if (*train_cmd) {
            const BriefCatalog catalog = load_catalog(train_opts.briefs_path);
            if (catalog.briefs.empty()) {
                std::cerr << "no briefs in " << train_opts.briefs_path << "\n";
                return 1;
            }
            train_options.signal = train_signal == "completion"
                                       ? grpo::RewardSignal::CompletionLadder
                                       : grpo::RewardSignal::EnvSteps;
            train_options.env_config = build_env_config(train_opts);
            grpo::ToyPolicy policy(static_cast<int>(grpo::template_vocab().size()),
                                   grpo::kFeatureDim);
            const auto log = grpo::train(policy, catalog.briefs, train_options);
            print_windows(log, train_window);
            if (!train_log_path.empty()) {
                std::ofstream out(train_log_path);
                for (const auto& record : log) out << record.to_json().dump() << "\n";
                std::cout << "wrote " << train_log_path << "\n";
            }
            return 0;
        }

        if (*collapse_cmd) {
            if (collapse_mitigate) collapse_config.review_deck_decay = 0.5;
            const grpo::CollapseReport report = grpo::run_collapse_experiment(collapse_config);
            std::printf("scripted all-review_deck agent: %d turns, cumulative reward %.4f, "
                        "aggregate quality %.4f\n",
                        report.scripted_turns, report.scripted_cumulative_reward,
                        report.scripted_aggregate_quality);
            std::cout << report.format_window_table();
            std::printf("terminal P(review_deck) = %.4f%s\n", report.terminal_p_review_deck,
                        collapse_mitigate ? " (with diminishing returns)" : "");
            if (!collapse_log_path.empty()) {
                std::ofstream out(collapse_log_path);
                for (const auto& record : report.log) out << record.to_json().dump() << "\n";
                std::cout << "wrote " << collapse_log_path << "\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
