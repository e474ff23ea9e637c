#include <cstdio>
#include <exception>

#include "selfsim/verify.hpp"

int main() {
    try {
        selfsim::AcceptanceConfig cfg;
        auto report = selfsim::run_acceptance(cfg, [](const selfsim::CheckResult& r) {
            std::printf("%s\n", selfsim::format_check(r).c_str());
            std::fflush(stdout);
        });
        int passed = 0;
        for (const auto& c : report.checks) passed += c.pass ? 1 : 0;
        std::printf("acceptance: %d/%zu criteria passed\n", passed, report.checks.size());
        return report.all_pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::printf("acceptance suite aborted: %s\n", e.what());
        return 2;
    }
}
