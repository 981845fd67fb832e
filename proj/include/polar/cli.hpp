#pragma once

#include <string>
#include <vector>

namespace polar {

// Entry point of the `polar` tool. Returns 0 on success, 1 on domain
// errors (reason on stderr) and 2 on usage errors.
int dispatch(int argc, char** argv);
int dispatch(const std::vector<std::string>& args);

}  // namespace polar
