#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "json.hpp"

namespace flarelab {

enum ExitCode { kExitOk = 0, kExitFound = 1, kExitInput = 2 };

struct CliFlags {
    std::string fixture;
    bool lenient = false;
    std::string json_out;
    std::uint64_t seed = 1;
    int probe = -1;        // -1: command default
    double nu = 1.2;
    double mu = 1.2;
    double eta = 0;
    int radius = -1;       // -1: command default
    std::string levels = "0:6";
    std::string tuple;
    std::string path;
    std::string from;
    std::string to;
    std::string circuit;
    int maxN = 6;
    int R = -1;            // -1: derived
    double A = -1;         // -1: derived
    long long samples = 0;
    std::string tag = "Lu";
    int k_max = 12;
    long long pairs = 10000;
    double k2 = 2;
    int lower_cap = 4;
};

struct Report {
    nlohmann::json doc;
    std::string table;
    int exit_code = kExitOk;
};

// Runs one command on the fixture named in `flags`. Input problems surface as
// exceptions; run_cli maps them to exit code 2.
Report dispatch(const std::string& command, const CliFlags& flags);

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace flarelab
