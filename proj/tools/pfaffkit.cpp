// pfaffkit: exact symbolic checks for Pfaffian systems, foliations, and
// their variational / Lie-algebra cohomology, driven by a small text DSL.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <pfaffkit/session.hpp>

namespace {

int run_file(const std::string& file, const pfaffkit::dsl::RunOptions& opt,
             const std::string& json_out) {
    std::ifstream in(file);
    if (!in) {
        std::cerr << "cannot open " << file << "\n";
        return 1;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    pfaffkit::dsl::SessionSpec spec;
    try {
        spec = pfaffkit::dsl::parse(buf.str());
    } catch (const pfaffkit::dsl::ParseError& e) {
        std::cerr << file << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << file << ": " << e.what() << "\n";
        return 1;
    }

    auto res = pfaffkit::dsl::run(spec, opt);
    std::cout << res.summary;
    const std::string payload = res.report.dump(2) + "\n";
    if (json_out.empty()) {
        std::cout << payload;
    } else {
        std::ofstream out(json_out, std::ios::binary);
        out << payload;
        std::cout << "report written to " << json_out << "\n";
    }
    return res.exit_code(opt);
}

int run_corpus(const std::string& dir, const pfaffkit::dsl::RunOptions& opt,
               const std::string& json_out) {
    if (!std::filesystem::is_directory(dir)) {
        std::cerr << "fixture directory not found: " << dir << "\n";
        return 1;
    }
    auto entries = pfaffkit::dsl::run_corpus(dir, opt);
    int rc = 0;
    for (const auto& e : entries) {
        const bool ok = e.parsed && e.fixpoint && !e.result.command_error;
        std::cout << (ok ? "ok   " : "FAIL ") << e.file;
        if (!e.parsed)
            std::cout << "  (" << e.diagnostic << ")";
        else if (!e.fixpoint)
            std::cout << "  (parse/print fixpoint violated)";
        std::cout << "\n";
        if (!ok) rc = 1;
        if (e.parsed && opt.strict_theorem1 && e.result.theorem1_unequal) rc = std::max(rc, 2);
    }
    const std::string payload = pfaffkit::dsl::corpus_report(entries).dump(2) + "\n";
    if (json_out.empty()) {
        std::cout << payload;
    } else {
        std::ofstream out(json_out, std::ios::binary);
        out << payload;
        std::cout << "report written to " << json_out << "\n";
    }
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact symbolic engine for integrable Pfaffian systems"};
    app.require_subcommand(1);

    std::string file, json_out, corpus_dir = "fixtures";
    bool strict = false;
    std::vector<unsigned> truncate_args;

    auto* run = app.add_subcommand("run", "run a session file");
    run->add_option("file", file, "session file in the pfaffkit DSL")->required();
    run->add_flag("--strict-theorem1", strict,
                  "exit nonzero when the two cohomology routes disagree");
    run->add_option("--json", json_out, "write the JSON report to this path");
    run->add_option("--truncate", truncate_args,
                    "override the truncation: polynomial degree D and frequency K")
        ->expected(2);

    auto* corpus = app.add_subcommand("corpus", "run the bundled fixture suite");
    corpus->add_option("dir", corpus_dir, "fixture directory (default: fixtures)");
    corpus->add_flag("--strict-theorem1", strict,
                     "exit nonzero when the two cohomology routes disagree");
    corpus->add_option("--json", json_out, "write the JSON report to this path");

    CLI11_PARSE(app, argc, argv);

    pfaffkit::dsl::RunOptions opt;
    opt.strict_theorem1 = strict;
    if (truncate_args.size() == 2) {
        if (truncate_args[0] == 0 || truncate_args[1] == 0) {
            std::cerr << "--truncate parameters must be positive\n";
            return 1;
        }
        opt.truncation_override = pfaffkit::Truncation{truncate_args[0], truncate_args[1]};
    }

    if (app.got_subcommand(run)) return run_file(file, opt, json_out);
    return run_corpus(corpus_dir, opt, json_out);
}
