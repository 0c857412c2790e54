// fracmeasure <command> [--config file] [--key value ...]
//
// Exit status: 0 success, 1 configuration error, 2 numerical or other failure.

#include "fracmeasure/app.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Spectral fractional Laplacian with measure data"};
    std::string command;
    std::string config_file;
    app.add_option("command", command, "solve | control | converge | quadcheck | eig")->required();
    app.add_option("--config", config_file, "key=value configuration file");

    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;
    for (const auto& [key, help] : fracmeasure::config_keys()) {
        options[key] = app.add_option("--" + key, flags[key], help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "fracmeasure: " << e.what() << "\n";
        return 1;
    }

    try {
        const auto cmd = fracmeasure::parse_command(command);
        fracmeasure::ConfigValues values;
        if (!config_file.empty()) values = fracmeasure::read_config_file(config_file);
        for (const auto& [key, option] : options) {
            if (option->count() > 0) values[key] = flags[key];
        }
        const auto config = fracmeasure::parse_config(cmd, values);
        fracmeasure::run(config, std::cout);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "fracmeasure: " << e.what() << "\n";
        return fracmeasure::exit_status(e);
    }
}
