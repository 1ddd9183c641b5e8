#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gonosomal::cli {

enum Exit { kOk = 0, kDomainFailure = 1, kInputError = 2 };

// argv[0] is the program name
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gonosomal::cli
