#include "text_util.hpp"

#include <fstream>
#include <sstream>

#include "evolve/error.hpp"

namespace evolve::detail {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileMissing, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace evolve::detail
