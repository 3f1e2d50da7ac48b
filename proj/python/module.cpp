// Python bindings for the slidegym core: the environment loop, the reward
// stack, and the GRPO math, with briefs/observations crossing as dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slidegym/env.hpp"
#include "slidegym/grpo.hpp"
#include "slidegym/harness.hpp"

namespace py = pybind11;
using namespace slidegym;
using nlohmann::json;

namespace {

py::object json_to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(j.get<bool>());
        case json::value_t::number_integer: return py::int_(j.get<long long>());
        case json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
        case json::value_t::number_float: return py::float_(j.get<double>());
        case json::value_t::string: return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) {
                out[py::str(key)] = json_to_py(value);
            }
            return out;
        }
        default: return py::none();
    }
}

json py_to_json(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
        json out = json::array();
        for (const auto& item : obj) out.push_back(py_to_json(item));
        return out;
    }
    if (py::isinstance<py::dict>(obj)) {
        json out = json::object();
        for (const auto& [key, value] : obj.cast<py::dict>()) {
            out[key.cast<std::string>()] = py_to_json(value);
        }
        return out;
    }
    throw py::type_error("unsupported type for JSON conversion");
}

SlideBrief brief_from_py(const py::dict& doc) {
    return brief_from_json(py_to_json(doc), "adhoc");
}

py::dict observation_to_py(const Observation& obs) {
    return json_to_py(obs.to_json()).cast<py::dict>();
}

ToolCall call_from_py(const py::handle& action) {
    if (py::isinstance<py::str>(action)) {
        const auto parsed = SlideEnv::parse_tool_call(action.cast<std::string>());
        if (!parsed) throw py::value_error("completion contains no valid tool call");
        return *parsed;
    }
    json doc = py_to_json(action);
    if (!doc.is_object() || !doc.contains("tool")) {
        throw py::value_error("tool call must be a dict with a 'tool' key or a completion string");
    }
    ToolCall call;
    call.tool = doc["tool"].get<std::string>();
    doc.erase("tool");
    call.params = doc;
    return call;
}

// Owns the env plus the judge used for final scoring.
class PyEnv {
  public:
    explicit PyEnv(double review_deck_decay) {
        config_.review_deck_decay = review_deck_decay;
        env_ = std::make_unique<SlideEnv>(config_);
    }

    py::dict reset(const py::dict& brief) {
        const Observation obs = env_->reset(brief_from_py(brief));
        py::dict out = observation_to_py(obs);
        out["observation_text"] = SlideEnv::render_observation_text(obs, env_->state());
        return out;
    }

    py::dict step(const py::handle& action) {
        StepResult result;
        if (py::isinstance<py::str>(action) &&
            !SlideEnv::parse_tool_call(action.cast<std::string>())) {
            result = env_->step_parse_failure("unparseable completion");
        } else {
            result = env_->step(call_from_py(action));
        }
        py::dict out = json_to_py(result.to_json()).cast<py::dict>();
        out["observation_text"] =
            SlideEnv::render_observation_text(result.observation, env_->state());
        return out;
    }

    py::dict state() const {
        const EnvState& s = env_->state();
        py::dict out;
        out["episode_id"] = s.episode_id;
        out["phase"] = std::string(to_string(s.phase));
        out["slide_count"] = s.slide_count();
        out["step_count"] = s.step_count;
        out["step_budget"] = s.step_budget;
        out["terminated"] = s.terminated;
        out["cumulative_reward"] = s.cumulative_reward;
        out["theme"] = s.theme;
        out["slides_html"] = s.slides_html;
        return out;
    }

    py::dict rewards() {
        const RewardBreakdown breakdown =
            aggregate_rewards(env_->state(), *config_.judge, config_.weights);
        return json_to_py(breakdown.to_json()).cast<py::dict>();
    }

    double current_quality() const { return env_->current_quality(); }

  private:
    EnvConfig config_;
    std::unique_ptr<SlideEnv> env_;
};

}  // namespace

PYBIND11_MODULE(slidegym, m) {
    m.doc() = "Slide-deck generation RL environment: episode loop, six-component "
              "reward stack, and the GRPO optimization lab.";

    py::class_<PyEnv>(m, "Env")
        .def(py::init<double>(), py::arg("review_deck_decay") = 1.0)
        .def("reset", &PyEnv::reset, py::arg("brief"),
             "Start an episode from a brief dict; returns the initial observation.")
        .def("step", &PyEnv::step, py::arg("action"),
             "Execute a tool call (dict) or raw completion string; returns "
             "{observation, reward, terminated, info}.")
        .def("state", &PyEnv::state)
        .def("rewards", &PyEnv::rewards, "Full six-component reward breakdown.")
        .def("current_quality", &PyEnv::current_quality);

    m.def("load_catalog", [](const std::string& path) {
        const BriefCatalog catalog = load_catalog(path);
        py::list briefs;
        for (const auto& brief : catalog.briefs) briefs.append(json_to_py(brief_to_json(brief)));
        return briefs;
    });

    m.def("validate_brief", [](const py::dict& brief) {
        const BriefValidation report = validate_brief(brief_from_py(brief));
        return py::make_tuple(report.ok, report.violations);
    });

    m.def("parse_tool_call", [](const std::string& completion) -> py::object {
        const auto call = SlideEnv::parse_tool_call(completion);
        if (!call) return py::none();
        json doc = call->params;
        doc["tool"] = call->tool;
        return json_to_py(doc);
    });

    m.def("tool_names", [] { return tool_names(); });
    m.def("theme_names", [] { return theme_names(); });

    m.def(
        "render_slide",
        [](const py::dict& spec, const std::string& theme, double colors) {
            const ThemePalette* palette = find_theme(theme);
            if (!palette) throw py::value_error("unknown theme: " + theme);
            ThemePalette tinted = *palette;
            tinted.colors = colors;
            SlideSpec slide_spec;
            const json doc = py_to_json(spec);
            slide_spec.title = doc.value("title", std::string{});
            if (doc.contains("sections")) {
                for (const auto& s : doc["sections"]) {
                    slide_spec.sections.push_back(
                        {s.value("heading", std::string{}), s.value("body", std::string{})});
                }
            }
            const RenderedSlide rendered = render_slide(slide_spec, tinted);
            py::dict out;
            out["html"] = rendered.html;
            out["valid_html"] = rendered.valid_html;
            out["word_count"] = rendered.word_count;
            out["section_count"] = rendered.section_count;
            out["filled_sections"] = rendered.filled_sections;
            return out;
        },
        py::arg("spec"), py::arg("theme") = "default", py::arg("colors") = 1.0);

    m.def("validate_html", [](const std::string& html) {
        const HtmlValidation report = validate_html(html);
        return py::make_tuple(report.valid, report.findings);
    });

    m.def(
        "interpolate_palette",
        [](const std::string& theme, double colors) {
            const ThemePalette* palette = find_theme(theme);
            if (!palette) throw py::value_error("unknown theme: " + theme);
            ThemePalette tinted = *palette;
            tinted.colors = colors;
            const ConcretePalette pal = interpolate_palette(tinted);
            auto rgb = [](const Rgb& c) { return py::make_tuple(c.r, c.g, c.b); };
            py::dict out;
            out["bg"] = rgb(pal.bg);
            out["text"] = rgb(pal.text);
            out["accent"] = rgb(pal.accent);
            out["secondary"] = rgb(pal.secondary);
            return out;
        },
        py::arg("theme"), py::arg("colors") = 1.0);

    m.def(
        "weighted_aggregate",
        [](const py::dict& components) {
            return weighted_aggregate(RewardBreakdown::from_json(py_to_json(components)),
                                      ComponentWeights{});
        },
        py::arg("components"));

    // GRPO math.
    m.def("compute_advantages", [](const std::vector<double>& rewards, double eps_adv) {
        return grpo::compute_advantages(rewards, eps_adv);
    }, py::arg("rewards"), py::arg("eps_adv") = 1e-4);
    m.def("token_logprob", [](const std::vector<double>& logits, int token) {
        return grpo::token_logprob(logits, token);
    });
    m.def("importance_ratio", &grpo::importance_ratio);
    m.def("clipped_token_loss", &grpo::clipped_token_loss, py::arg("ratio"),
          py::arg("advantage"), py::arg("eps_clip") = 0.2);
    m.def("snr", [](double sigma_true, double sigma_eta) {
        const grpo::SnrResult result = grpo::snr(sigma_true, sigma_eta);
        return py::make_tuple(result.value, result.infinite);
    });
    m.def("aggregate_noise", [](const std::vector<double>& weights,
                                const std::vector<double>& sigmas) {
        return grpo::aggregate_noise(weights, sigmas);
    });
    m.def("completion_reward", [](const std::string& completion, const py::dict& brief) {
        return grpo::completion_reward(completion, brief_from_py(brief));
    });

    // Harness.
    m.def("competent_script", [](const py::dict& brief) {
        return competent_script(brief_from_py(brief));
    });
    m.def(
        "run_episode",
        [](const py::dict& brief, const std::vector<std::string>& script,
           const std::string& model_name) {
            ScriptedAgent agent(model_name, script);
            const Trajectory trajectory = run_episode(agent, brief_from_py(brief));
            return json_to_py(trajectory.to_json());
        },
        py::arg("brief"), py::arg("script"), py::arg("model_name") = "scripted");

    m.def("inverse_spec_prompt", [] { return JudgeGateway::inverse_spec_prompt(); });
}
