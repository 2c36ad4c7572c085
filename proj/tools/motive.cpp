#include <iostream>
#include <string>
#include <vector>

#include "motive/cli/run.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args[0] == "--help" || args[0] == "-h") {
        std::cout << "usage: motive <measure|integrate|count|poincare|series|validate> [options] \"<input>\"\n"
                     "options: --json --latex --primes/-p P,.. --depth D --budget N --smax/-s S --vars N\n"
                     "         --power N --symbolic --numeric --both --max-order K --terms K --class NAME=FORMULA\n";
        return args.empty() ? 2 : 0;
    }
    return motive::cli::main_entry(args, std::cout, std::cerr);
}
