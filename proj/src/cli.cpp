#include "fo2/cli.hpp"

#include <iostream>

namespace fo2 {

int cli_main(const std::vector<std::string>&, std::ostream&, std::ostream& err) {
    err << "not implemented yet\n";
    return exit_usage;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace fo2
