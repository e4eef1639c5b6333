#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "critiq/customizer.hpp"
#include "critiq/error.hpp"
#include "critiq/metrics.hpp"
#include "critiq/pipeline.hpp"
#include "critiq/prioritizer.hpp"
#include "critiq/rebuttal.hpp"
#include "critiq/store.hpp"
#include "critiq/textutil.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace critiq;

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

json py_to_json(py::handle obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::dict>(obj)) {
        json out = json::object();
        for (auto item : obj.cast<py::dict>()) {
            out[item.first.cast<std::string>()] = py_to_json(item.second);
        }
        return out;
    }
    if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
        json out = json::array();
        for (auto item : obj.cast<py::sequence>()) out.push_back(py_to_json(item));
        return out;
    }
    throw Error(Errc::invalid_config, "unsupported python value in conversion");
}

double py_label_to_score(const std::string& label) {
    try {
        return label_to_score(valid_label_from(label));
    } catch (const Error&) {
        return label_to_score(evid_label_from(label));
    }
}

RunConfig config_from_options(const json& options) {
    RunConfig cfg;
    if (options.is_null()) return cfg;
    if (options.contains("mode")) cfg.mode = dimension_mode_from(options["mode"].get<std::string>());
    if (options.contains("epsilon")) cfg.debate.epsilon = options["epsilon"].get<double>();
    if (options.contains("max_rounds")) cfg.debate.max_rounds = options["max_rounds"].get<int>();
    if (options.contains("valid_weight")) {
        cfg.debate.valid_weight = options["valid_weight"].get<double>();
    }
    if (options.contains("alpha")) cfg.severity.alpha = options["alpha"].get<double>();
    if (options.contains("beta")) cfg.severity.beta = options["beta"].get<double>();
    if (options.contains("k")) cfg.severity.k = options["k"].get<int>();
    if (options.contains("unknown_category_imp")) {
        cfg.severity.unknown_category_imp = options["unknown_category_imp"].get<double>();
    }
    if (options.contains("max_dims")) {
        cfg.customizer.max_generated = options["max_dims"].get<int>();
    }
    if (options.contains("no_rebuttal")) cfg.no_rebuttal = options["no_rebuttal"].get<bool>();
    if (options.contains("no_customizer")) cfg.no_customizer = options["no_customizer"].get<bool>();
    if (options.contains("no_prioritizer")) {
        cfg.no_prioritizer = options["no_prioritizer"].get<bool>();
    }
    if (options.contains("no_impact")) cfg.no_impact = options["no_impact"].get<bool>();
    if (options.contains("parallelism")) cfg.parallelism = options["parallelism"].get<int>();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "multi-agent paper weakness review pipeline (core bindings)";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        }
    });

    m.def("label_to_score", &py_label_to_score, py::arg("label"),
          "Canonical score for a validity or evidence label.");

    m.def(
        "combined_support",
        [](double valid_score, double evid_score, double valid_weight) {
            ValidityAssessment a;
            a.valid_score = valid_score;
            a.evid_score = evid_score;
            return combined_support(a, valid_weight);
        },
        py::arg("valid_score"), py::arg("evid_score"), py::arg("valid_weight") = 0.5);

    m.def("normalize_question", [](const std::string& q) { return normalize_question(q); },
          py::arg("question"));

    m.def("expert_dimensions", []() {
        json j;
        to_json(j, expert_dimensions());
        return json_to_py(j["dimensions"]);
    });

    m.def(
        "fit_impact_table",
        [](py::list records, double smoothing, const std::string& unit) {
            std::vector<ReviewCorpusRecord> corpus;
            for (auto item : records) {
                corpus.push_back(py_to_json(item).get<ReviewCorpusRecord>());
            }
            FrequencyUnit frequency_unit;
            if (unit == "bullet") {
                frequency_unit = FrequencyUnit::bullet;
            } else if (unit == "review") {
                frequency_unit = FrequencyUnit::review;
            } else {
                throw Error(Errc::invalid_config, "unit must be 'bullet' or 'review'");
            }
            json j;
            to_json(j, fit_impact_table(corpus, smoothing, nullptr, frequency_unit));
            return json_to_py(j);
        },
        py::arg("records"), py::arg("smoothing") = 1.0, py::arg("unit") = "bullet");

    m.def(
        "normalize_impact",
        [](py::dict table) {
            ImpactTable t = py_to_json(table).get<ImpactTable>();
            return normalize_impact(t);
        },
        py::arg("table"));

    m.def(
        "severity",
        [](double imp_norm, double valid_score, double evid_score, double alpha, double beta,
           bool impact_enabled) {
            SeverityConfig cfg;
            cfg.alpha = alpha;
            cfg.beta = beta;
            cfg.impact_enabled = impact_enabled;
            return severity(imp_norm, valid_score, evid_score, cfg);
        },
        py::arg("imp_norm"), py::arg("valid_score"), py::arg("evid_score"),
        py::arg("alpha") = 0.5, py::arg("beta") = 0.3, py::arg("impact_enabled") = true);

    m.def(
        "rank_top_k",
        [](py::list retained, py::dict table, double alpha, double beta, int k,
           double unknown_category_imp, bool prioritizer_enabled, bool impact_enabled) {
            std::vector<RetainedWeakness> items;
            for (auto item : retained) {
                json j = py_to_json(item);
                RetainedWeakness rw;
                rw.weakness.id = j.value("id", "w" + std::to_string(items.size()));
                rw.weakness.text = j.value("text", "");
                rw.weakness.category = j.value("category", "");
                rw.weakness.state = WeaknessState::retained;
                rw.valid_score = j.at("valid_score").get<double>();
                rw.evid_score = j.at("evid_score").get<double>();
                items.push_back(std::move(rw));
            }
            ImpactTable t;
            if (py::len(table) > 0) t = py_to_json(table).get<ImpactTable>();
            SeverityConfig cfg;
            cfg.alpha = alpha;
            cfg.beta = beta;
            cfg.k = k;
            cfg.unknown_category_imp = unknown_category_imp;
            cfg.prioritizer_enabled = prioritizer_enabled;
            cfg.impact_enabled = impact_enabled;
            json out = json::array();
            for (const auto& sw : rank_top_k(items, t, cfg)) {
                json j;
                to_json(j, sw);
                out.push_back(std::move(j));
            }
            return json_to_py(out);
        },
        py::arg("retained"), py::arg("table") = py::dict(), py::arg("alpha") = 0.5,
        py::arg("beta") = 0.3, py::arg("k") = 10, py::arg("unknown_category_imp") = 0.5,
        py::arg("prioritizer_enabled") = true, py::arg("impact_enabled") = true);

    m.def(
        "tfidf_similarity",
        [](const std::string& a, const std::string& b) { return similarity(a, b); },
        py::arg("a"), py::arg("b"));

    m.def(
        "match_and_score",
        [](const std::vector<std::string>& gen, const std::vector<std::string>& gold,
           double theta) {
            MatchConfig cfg;
            cfg.theta = theta;
            json j;
            to_json(j, match_and_score(gen, gold, cfg));
            return json_to_py(j);
        },
        py::arg("gen"), py::arg("gold"), py::arg("theta") = 0.5);

    m.def(
        "specificity",
        [](const std::map<std::string, std::vector<std::string>>& per_paper) {
            return specificity(per_paper);
        },
        py::arg("weaknesses_by_paper"));

    m.def("f1_inv", &f1_inv, py::arg("f1_invalid"), py::arg("p_valid"), py::arg("r_valid"),
          py::arg("report_scale") = false);

    m.def(
        "pearson",
        [](const std::vector<double>& xs, const std::vector<double>& ys) {
            return pearson_correlation(xs, ys);
        },
        py::arg("xs"), py::arg("ys"));

    m.def(
        "retention_rate",
        [](std::size_t proposed, std::size_t retained) {
            return retention_rate(proposed, retained);
        },
        py::arg("proposed"), py::arg("retained"));

    m.def(
        "load_paper",
        [](const std::string& path) {
            json j;
            to_json(j, load_paper(path));
            return json_to_py(j);
        },
        py::arg("path"));

    m.def(
        "render_template",
        [](const std::string& template_id, const std::map<std::string, std::string>& variables) {
            return render_template_text(TemplateRegistry::builtin().get(template_id).text,
                                        variables);
        },
        py::arg("template_id"), py::arg("variables"));

    m.def(
        "run_review",
        [](const std::string& paper_path, const std::string& script_path, py::object options) {
            PaperDocument paper = load_paper(paper_path);
            ReplayScript script = load_replay_script(script_path);
            GatewayConfig gcfg;
            gcfg.initial_backoff_ms = 0;
            Gateway gateway(std::make_shared<ScriptedBackend>(std::move(script)), gcfg);

            json opts = options.is_none() ? json(nullptr) : py_to_json(options);
            RunConfig cfg = config_from_options(opts);
            std::optional<ImpactTable> table;
            if (!opts.is_null() && opts.contains("impact_table")) {
                table = load_impact_table(opts["impact_table"].get<std::string>());
            }

            RunArchive archive;
            archive.run = run_review(paper, gateway, table, cfg);
            return json_to_py(json::parse(encode_run(archive)));
        },
        py::arg("paper_path"), py::arg("script_path"), py::arg("options") = py::none(),
        "Run the scripted pipeline end to end and return the archive as a dict.");

    m.attr("__version__") = "0.1.0";
}
