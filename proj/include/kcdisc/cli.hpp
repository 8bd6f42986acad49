#pragma once

#include "kcdisc/score.hpp"
#include "kcdisc/synthgen.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace kcdisc {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Worker count from KCDISC_WORKERS, or 1.
int default_workers();

struct BenchRow {
    std::string data_kind;
    double density = 0.0;
    int n = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    std::string score;
    std::string status;  // ok | failed
    double f1 = 0.0;
    int shd = 0;
    double normalized_shd = 0.0;
    double wall_time = 0.0;
    std::string error;
};

inline constexpr const char* kBenchHeader =
    "data_kind,density,n,rep,seed,score,status,f1,shd,normalized_shd,wall_time,error";

std::string bench_row_csv(const BenchRow& row);
std::vector<BenchRow> parse_bench_csv(const std::string& text);
// Per (data_kind, density, n, score) cell: count of ok runs, means and
// standard errors of f1 and normalized SHD, mean SHD.
std::string bench_summary_csv(const std::vector<BenchRow>& rows);

// Dataset seed of one benchmark repetition; shared by all score kinds.
std::uint64_t bench_seed(std::uint64_t base, DataKind kind, double density, int n, int rep);

}  // namespace kcdisc
