// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any
// selected criterion fails.

#include "conlearn/verify.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria"};
    std::vector<std::string> only;
    bool list = false;
    app.add_option("--criterion", only, "Run only the named criterion");
    app.add_flag("--list", list, "Print criterion names and exit");
    CLI11_PARSE(app, argc, argv);

    const auto& checks = conlearn::all_checks();
    if (list) {
        for (const auto& c : checks) {
            std::cout << c.name << "\n";
        }
        return 0;
    }
    int failures = 0;
    int ran = 0;
    for (const auto& c : checks) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) {
            continue;
        }
        ++ran;
        const auto r = c.run();
        conlearn::print_result(r, std::cout);
        failures += r.passed ? 0 : 1;
    }
    if (ran == 0) {
        std::cerr << "no criterion matched\n";
        return 2;
    }
    std::cout << (ran - failures) << "/" << ran << " criteria passed\n";
    return failures == 0 ? 0 : 1;
}
