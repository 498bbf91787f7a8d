// Acceptance gate: every shipped claim measured at full size, one verdict
// line each. A criterion passes only if its statistic lands in the stated
// band and the run stays inside its time budget. Exit code 2 on any failure
// so the suite can gate releases.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "roadnet/selftest.hpp"

namespace {

struct Criterion {
    const char* label;
    double budget_seconds;
    roadnet::CheckResult (*run)();
};

const Criterion kCriteria[] = {
    {"road count law", 10, [] { return roadnet::selftest::road_count_law(); }},
    {"speed mark law", 10, [] { return roadnet::selftest::pareto_speed_law(); }},
    {"ball speed law", 60, [] { return roadnet::selftest::ball_speed_law(); }},
    {"metric axioms", 300, [] { return roadnet::selftest::metric_axioms(); }},
    {"bound sandwich", 600, [] { return roadnet::selftest::bound_sandwich(); }},
    {"oracle equivalence", 120, [] { return roadnet::selftest::oracle_equivalence(); }},
    {"epsilon monotonicity", 300, [] { return roadnet::selftest::epsilon_monotonicity(); }},
    {"truncation exactness", 300, [] { return roadnet::selftest::truncation_exactness(); }},
    {"scaling collapse", 1800, [] { return roadnet::selftest::scaling_collapse(); }},
    {"multiscale bounds", 1800, [] { return roadnet::selftest::multiscale_battery(); }},
    {"volume ordering", 7200, [] { return roadnet::selftest::volume_ordering(); }},
    {"connection slope", 7200, [] { return roadnet::selftest::quick_connection_slope(); }},
    {"covering dimension", 3600, [] { return roadnet::selftest::covering_dimension(); }},
    {"speed recovery", 300, [] { return roadnet::selftest::speed_recovery(); }},
};

constexpr int kCount = (int)(sizeof(kCriteria) / sizeof(kCriteria[0]));

}  // namespace

int main(int argc, char** argv) {
    // optional arguments select criteria by 1-based index, e.g. "acceptance 3 13"
    std::vector<int> wanted;
    for (int a = 1; a < argc; ++a) {
        const int idx = std::atoi(argv[a]);
        if (idx < 1 || idx > kCount) {
            std::fprintf(stderr, "usage: %s [index in 1..%d]...\n", argv[0], kCount);
            return 1;
        }
        wanted.push_back(idx);
    }
    if (wanted.empty())
        for (int i = 1; i <= kCount; ++i) wanted.push_back(i);

    int failures = 0;
    double total = 0.0;
    for (int idx : wanted) {
        const Criterion& c = kCriteria[idx - 1];
        const auto start = std::chrono::steady_clock::now();
        roadnet::CheckResult res = c.run();
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        total += secs;
        const bool in_budget = secs <= c.budget_seconds;
        const bool pass = res.pass && in_budget;
        if (!pass) ++failures;
        std::printf("[%s] %02d %s: %s (%.1fs%s of %.0fs budget)\n", pass ? "PASS" : "FAIL", idx,
                    c.label, res.detail.c_str(), secs, in_budget ? "" : ", OVER BUDGET",
                    c.budget_seconds);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed in %.0fs\n", (int)wanted.size() - failures, wanted.size(),
                total);
    return failures == 0 ? 0 : 2;
}
