#include "sgf/suites.hpp"

#include <cstdio>

int main()
{
    int failed = 0;
    for (int k = 1; k <= sgf::acceptance_count; ++k) {
        const sgf::CheckResult r = sgf::acceptance_criterion(k);
        std::printf("[%s] %2d %s: %s (%.2f s)\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str(),
                    r.seconds);
        std::fflush(stdout);
        failed += !r.passed;
    }
    std::printf("%d of %d criteria passed\n", sgf::acceptance_count - failed, sgf::acceptance_count);
    return failed ? 1 : 0;
}
