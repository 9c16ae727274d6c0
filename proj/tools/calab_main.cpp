#include "calab/commands.hpp"
#include "calab/config.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

namespace {

bool write_outputs(const fs::path& out, const calab::CommandOutput& result)
{
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        std::cerr << "calab: cannot create " << out << ": " << ec.message() << "\n";
        return false;
    }
    auto files = result.files;
    files.emplace_back("timing.json", calab::dump(result.timing));
    for (const auto& [name, contents] : files) {
        std::ofstream f(out / name, std::ios::binary);
        f << contents;
        if (!f) {
            std::cerr << "calab: cannot write " << (out / name) << "\n";
            return false;
        }
    }
    return true;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"calab: centro-affine spectral and Minkowski-problem checks"};
    std::string command, config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = 1;
    app.add_option("command", command, "spectrum | bochner | pinch | isomorphic | solve | sweep | verify-all")
        ->required()
        ->check(CLI::IsMember(calab::command_names()));
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--out", out_dir, "output directory")->required();
    auto* seed_opt = app.add_option("--seed", seed, "overrides the config seed");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    calab::Json config;
    {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "calab: cannot open config " << config_path << "\n";
            return 2;
        }
        try {
            config = calab::Json::parse(in);
        } catch (const calab::Json::parse_error& e) {
            std::cerr << "calab: malformed config: " << e.what() << "\n";
            return 2;
        }
    }

    calab::RunOptions options;
    if (*seed_opt) options.seed = seed;
    options.threads = threads;
    options.base_dir = fs::path(config_path).parent_path();
    calab::CommandOutput result;
    try {
        result = calab::run_command(command, config, options);
    } catch (const calab::ContractError& e) {
        std::cerr << "calab: config error: " << e.what() << "\n";
        return 2;
    }
    if (!write_outputs(out_dir, result)) return 1;
    std::cout << command << ": " << (result.pass ? "pass" : "FAIL") << " (" << out_dir << ")\n";
    return result.pass ? 0 : 1;
}
