#ifndef PFAFFKIT_SESSION_HPP
#define PFAFFKIT_SESSION_HPP

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dsl.hpp"

namespace pfaffkit::dsl {

using json = nlohmann::ordered_json;

struct RunOptions {
    bool strict_theorem1 = false;
    std::optional<Truncation> truncation_override;
};

struct RunResult {
    json report;
    std::string summary;          // human-readable, includes timings
    bool command_error = false;   // some command raised a structured error
    bool theorem1_unequal = false;

    int exit_code(const RunOptions& opt) const {
        if (command_error) return 1;
        if (opt.strict_theorem1 && theorem1_unequal) return 2;
        return 0;
    }
};

namespace detail {

inline json dims_json(const std::vector<size_t>& dims, size_t first_degree) {
    json out = json::object();
    for (size_t i = 0; i < dims.size(); ++i)
        out[std::to_string(first_degree + i)] = dims[i];
    return out;
}

/// Split the chart along a system of coordinate differentials <dy^1..dy^q>.
inline std::pair<std::vector<std::string>, std::vector<std::string>> coordinate_split(
    const ChartPtr& chart, const PfaffianSystem& S) {
    std::vector<std::string> vertical;
    for (const auto& g : S.generators()) {
        bool is_coordinate = false;
        if (g.terms().size() == 1) {
            const auto& [idx, coef] = *g.terms().begin();
            if (idx.size() == 1 && coef == ScalarExpr::one(chart))
                is_coordinate = (vertical.emplace_back(chart->coord(idx[0]).name), true);
        }
        if (!is_coordinate)
            throw Error(
                "this command needs a foliated model: every system generator must be a "
                "coordinate differential dy (got " + print(g) + ")");
    }
    std::vector<std::string> horizontal;
    for (size_t i = 0; i < chart->dimension(); ++i) {
        const auto& n = chart->coord(i).name;
        if (std::find(vertical.begin(), vertical.end(), n) == vertical.end())
            horizontal.push_back(n);
    }
    return {std::move(horizontal), std::move(vertical)};
}

inline ModelPtr system_model(const ChartPtr& chart, const PfaffianSystem& S) {
    auto [h, v] = coordinate_split(chart, S);
    return FoliatedModel::make(chart, h, v);
}

inline ModelPtr action_model(const ChartPtr& chart, const ActionSpec& A) {
    auto [h, v] = coordinate_split(chart, A.system);
    return FoliatedModel::make(chart, h, v, A.algebra, A.fields);
}

}  // namespace detail

inline RunResult run(const SessionSpec& spec, const RunOptions& opt = {}) {
    RunResult res;
    const Truncation trunc = opt.truncation_override ? *opt.truncation_override
                             : spec.truncation       ? *spec.truncation
                                                     : Truncation{};
    std::ostringstream summary;
    json commands = json::array();
    json cohomology_summary = json::object();
    json summary_keys = json::object();

    for (const auto& cmd : spec.commands) {
        json cj = json::object();
        cj["command"] = cmd.name;
        cj["args"] = cmd.args;
        std::string line;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if (cmd.name == "check-integrable") {
                const auto& S = spec.systems.at(cmd.args[0]);
                const bool ok = is_integrable(S);
                cj["integrable"] = ok;
                if (!ok) {
                    DifferentialForm all = DifferentialForm::from_scalar(ScalarExpr::one(spec.chart));
                    for (const auto& g : S.generators()) all = wedge(all, g);
                    for (const auto& g : S.generators()) {
                        auto obstruction = wedge(exterior_d(g), all);
                        if (obstruction.is_zero()) continue;
                        cj["witness"] = {{"generator", print(g)},
                                         {"obstruction", print(obstruction)}};
                        break;
                    }
                }
                summary_keys["check-integrable"] = ok;
                line = cmd.args[0] + (ok ? " is integrable" : " is not integrable");
            } else if (cmd.name == "check-invariant") {
                const auto& w = spec.forms.at(cmd.args[0]);
                const auto& S = spec.systems.at(cmd.args[1]);
                const bool ok = is_invariant_form(w, S);
                cj["invariant"] = ok;
                summary_keys["check-invariant"] = ok;
                line = cmd.args[0] + (ok ? " is invariant" : " is not invariant") + " under " +
                       cmd.args[1];
            } else if (cmd.name == "check-action") {
                const auto& A = spec.actions.at(cmd.args[0]).spec;
                auto rep = check_action(A);
                auto tv = check_transversally_free(A);
                cj["bracket_compatible"] = rep.bracket_compatible;
                cj["fields_are_symmetries"] = rep.field_is_symmetry;
                cj["jacobi_holds"] = rep.jacobi_holds;
                cj["transversally_free"] = tv.ok;
                cj["ok"] = rep.ok();
                summary_keys["check-action"] = rep.ok();
                line = cmd.args[0] + (rep.ok() ? " is a Lie algebra action" : " fails the action checks") +
                       (tv.ok ? ", transversally free" : ", not transversally free");
            } else if (cmd.name == "cartan-basis") {
                const auto& binding = spec.actions.at(cmd.args[0]);
                auto B = cartan_basis(binding.spec);
                const bool eq = verify_structure_equation(B, binding.spec.algebra);
                json forms = json::array();
                for (const auto& w : B.forms) forms.push_back(print(w));
                cj["forms"] = forms;
                cj["structure_equation_holds"] = eq;
                summary_keys["cartan-basis"] = {{"structure_equation_holds", eq}};
                line = "Cartan basis of " + cmd.args[0] + " has " +
                       std::to_string(B.forms.size()) + " forms; structure equation " +
                       (eq ? "holds" : "FAILS");
            } else if (cmd.name == "cohomology vertical") {
                auto model = detail::action_model(spec.chart, spec.actions.at(cmd.args[0]).spec);
                auto rep = vertical_cohomology(model, trunc);
                cj["truncation"] = {{"degree", trunc.degree}, {"freq", trunc.freq}};
                cj["dims"] = detail::dims_json(rep.dims, 1);
                cohomology_summary["vertical"] = cj["dims"];
                line = "vertical cohomology of " + cmd.args[0] + ": " + cj["dims"].dump();
            } else if (cmd.name == "cohomology invariant") {
                auto model = detail::system_model(spec.chart, spec.systems.at(cmd.args[0]));
                auto rep = invariant_complex(model, trunc);
                cj["truncation"] = {{"degree", trunc.degree}, {"freq", trunc.freq}};
                cj["space"] = detail::dims_json(rep.space_dims, 0);
                cj["dims"] = detail::dims_json(rep.cohomology, 0);
                cohomology_summary["invariant"] = cj["dims"];
                line = "invariant-form cohomology of " + cmd.args[0] + ": " + cj["dims"].dump();
            } else if (cmd.name == "cohomology equivariant") {
                auto model = detail::action_model(spec.chart, spec.actions.at(cmd.args[0]).spec);
                auto rep = equivariant_complex(model, trunc);
                cj["truncation"] = {{"degree", trunc.degree}, {"freq", trunc.freq}};
                cj["space"] = detail::dims_json(rep.space_dims, 0);
                cj["dims"] = detail::dims_json(rep.cohomology, 0);
                cohomology_summary["equivariant"] = cj["dims"];
                line = "equivariant cohomology of " + cmd.args[0] + ": " + cj["dims"].dump();
            } else if (cmd.name == "cohomology ce") {
                const auto& g = spec.algebras.at(cmd.args[0]);
                auto dims = ce_cohomology(CEModule::trivial(g));
                cj["dims"] = detail::dims_json(dims, 0);
                cohomology_summary["ce"] = cj["dims"];
                line = "Chevalley-Eilenberg cohomology of " + cmd.args[0] + " (trivial module): " +
                       cj["dims"].dump();
            } else if (cmd.name == "euler") {
                const auto& w = spec.forms.at(cmd.args[0]);
                auto model = detail::action_model(spec.chart, spec.actions.at(cmd.args[1]).spec);
                const unsigned p = unsigned(model->p());
                if (w.degree() != p && !w.is_zero())
                    throw Error("euler expects a horizontal form of degree " + std::to_string(p));
                auto mu = bidegree_component(model, w, 0, p);
                if (!(mu.to_form() == w))
                    throw Error("euler expects a purely horizontal form (no dy factors)");
                auto cls = euler(mu);
                cj["class"] = print(cls.rep.to_form());
                cj["zero"] = cls.is_zero();
                summary_keys["euler"] = {{"zero", cls.is_zero()}};
                line = "Euler class of " + cmd.args[0] + ": " + std::string(cj["class"]);
            } else if (cmd.name == "compare-theorem1") {
                auto model = detail::action_model(spec.chart, spec.actions.at(cmd.args[0]).spec);
                auto rep = theorem1_compare(model, trunc);
                cj["truncation"] = {{"degree", trunc.degree}, {"freq", trunc.freq}};
                cj["vertical"] = detail::dims_json(rep.vertical_dims, 1);
                cj["ce"] = detail::dims_json(rep.ce_dims, 1);
                cj["verdict"] = rep.equal ? "equal" : "unequal";
                if (!rep.equal) res.theorem1_unequal = true;
                summary_keys["compare-theorem1"] = {{"verdict", cj["verdict"]}};
                line = "theorem-1 comparison for " + cmd.args[0] + ": " +
                       std::string(cj["verdict"]);
            } else if (cmd.name == "scan-obstructions") {
                CohomologyReport variational{"vertical", trunc, {}};
                if (auto it = spec.actions.find(cmd.args[0]); it != spec.actions.end()) {
                    auto model = detail::action_model(spec.chart, it->second.spec);
                    variational = vertical_cohomology(model, trunc);
                } else {
                    auto model = detail::system_model(spec.chart, spec.systems.at(cmd.args[0]));
                    TruncatedXi X(model, trunc);
                    bool all_zero = true;
                    for (unsigned r = 0; r <= model->q(); ++r) all_zero &= (X.dim(r) == 0);
                    if (!all_zero)
                        throw Error(
                            "scan-obstructions on a bare system needs the truncated classes to "
                            "vanish; attach an action to compute a nonzero vertical cohomology");
                    variational.dims.assign(model->q(), 0);
                }
                std::vector<ObstructionCandidate> cands;
                for (size_t i = 1; i < cmd.args.size(); ++i)
                    cands.push_back({cmd.args[i], CEModule::trivial(spec.algebras.at(cmd.args[i]))});
                auto verdicts = obstruction_scan(variational, cands);
                cj["source"] = cmd.args[0];
                cj["variational"] = detail::dims_json(variational.dims, 1);
                json arr = json::array();
                std::vector<std::string> excluded;
                for (const auto& v : verdicts) {
                    arr.push_back({{"algebra", v.label},
                                   {"excluded", v.excluded},
                                   {"ce", detail::dims_json(v.ce_dims, 1)}});
                    if (v.excluded) excluded.push_back(v.label);
                }
                cj["candidates"] = arr;
                summary_keys["scan-obstructions"] = {{"excluded", excluded}};
                line = "obstruction scan excluded " + std::to_string(excluded.size()) + " of " +
                       std::to_string(verdicts.size()) + " candidate algebras";
            } else if (cmd.name == "relative-invariance") {
                const auto& w = spec.forms.at(cmd.args[0]);
                auto model = detail::system_model(spec.chart, spec.systems.at(cmd.args[1]));
                auto v = relative_invariance_check(w, model);
                cj["conditions"] = v.conditions;
                cj["all_hold"] = v.all_hold;
                cj["differential_is_invariant"] = v.d_invariant;
                summary_keys["relative-invariance"] = v.all_hold;
                line = cmd.args[0] +
                       (v.all_hold ? " is relatively invariant" : " is not relatively invariant");
            } else {
                throw Error("unknown command: " + cmd.name);
            }
        } catch (const std::exception& e) {
            cj["error"] = e.what();
            res.command_error = true;
            line = "error: " + std::string(e.what());
        }
        const auto t1 = std::chrono::steady_clock::now();
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
        summary << cmd.name << ": " << line << "  [" << ms << " ms]\n";
        commands.push_back(std::move(cj));
    }

    json report = json::object();
    report["schema"] = "pfaffkit-report/1";
    report["chart"] = spec.chart_name;
    report["truncation"] = {{"degree", trunc.degree}, {"freq", trunc.freq}};
    report["commands"] = std::move(commands);
    if (!cohomology_summary.empty()) report["cohomology"] = std::move(cohomology_summary);
    for (auto& [k, v] : summary_keys.items()) report[k] = v;
    res.report = std::move(report);
    res.summary = summary.str();
    return res;
}

// ---------------------------------------------------------------------------
// Fixture corpus runner

struct CorpusEntry {
    std::string file;
    bool parsed = false;
    bool fixpoint = false;
    std::string diagnostic;
    RunResult result;
};

inline size_t worker_count() {
    if (const char* env = std::getenv("PFAFFKIT_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return size_t(n);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

inline std::vector<CorpusEntry> run_corpus(const std::filesystem::path& dir,
                                           const RunOptions& opt = {}) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".pk") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::vector<CorpusEntry> entries(files.size());
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
            CorpusEntry& out = entries[i];
            out.file = files[i].filename().string();
            std::ifstream in(files[i]);
            std::stringstream buf;
            buf << in.rdbuf();
            try {
                auto spec = parse(buf.str());
                out.parsed = true;
                const std::string printed = print(spec);
                out.fixpoint = (print(parse(printed)) == printed);
                out.result = run(spec, opt);
            } catch (const std::exception& e) {
                out.diagnostic = e.what();
            }
        }
    };
    const size_t n = std::min(worker_count(), std::max<size_t>(files.size(), 1));
    std::vector<std::thread> pool;
    for (size_t i = 0; i + 1 < n; ++i) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return entries;
}

inline json corpus_report(const std::vector<CorpusEntry>& entries) {
    json out = json::object();
    out["schema"] = "pfaffkit-corpus/1";
    json arr = json::array();
    for (const auto& e : entries) {
        json j = json::object();
        j["file"] = e.file;
        j["parsed"] = e.parsed;
        j["fixpoint"] = e.fixpoint;
        if (!e.diagnostic.empty()) j["error"] = e.diagnostic;
        if (e.parsed) j["report"] = e.result.report;
        arr.push_back(std::move(j));
    }
    out["fixtures"] = std::move(arr);
    return out;
}

}  // namespace pfaffkit::dsl

#endif
