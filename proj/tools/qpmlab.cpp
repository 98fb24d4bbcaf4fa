// qpmlab: manifest-driven runner for the quasi-periodic operator toolkit.
#include <iostream>

#include <CLI11.hpp>

#include "qpm/commands.hpp"
#include "qpm/error.hpp"

namespace {

constexpr int kFailedCheck = 1;
constexpr int kBadManifest = 2;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moving-block diagnostics for quasi-periodic operators with flat pieces"};
    app.require_subcommand(1);
    std::string manifest_path, out_dir;
    unsigned threads = 1;
    bool strict = false;
    for (const auto& name : qpm::command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--manifest", manifest_path, "experiment manifest (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the manifest)");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
        sub->add_flag("--strict", strict, "treat warnings as failures");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kBadManifest;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    qpm::Manifest manifest;
    try {
        manifest = qpm::load_manifest(manifest_path);
    } catch (const qpm::Error& e) {
        std::cerr << "manifest error: " << e.what() << '\n';
        return kBadManifest;
    }

    qpm::CommandResult result;
    try {
        result = qpm::run_command(command, manifest, {out_dir, threads, strict});
    } catch (const qpm::Error& e) {
        std::cerr << command << " failed: " << e.what() << '\n';
        return e.kind() == qpm::ErrorKind::ManifestError ? kBadManifest : kFailedCheck;
    }
    for (const auto& c : result.checks) {
        const char* tag = c.passed ? "PASS" : (c.asserted || strict ? "FAIL" : "WARN");
        std::cout << tag << "  " << c.name << "  " << c.detail << '\n';
    }
    for (const auto& f : result.files) std::cout << "wrote " << f << '\n';
    if (const auto* bad = result.first_failure(strict)) {
        std::cerr << "first failing check: " << bad->name << " fails (" << bad->detail << ")\n";
        return kFailedCheck;
    }
    return 0;
}
