#pragma once

#include <string>

#include "hcpcut/model.hpp"

namespace hcpcut {

// JSON-shaped instance text. Matrices are row-major nested arrays, one per period.
HcpInstance parse_instance(const std::string& text);
std::string serialize_instance(const HcpInstance& inst);

HcpInstance read_instance_file(const std::string& path);
void write_instance_file(const std::string& path, const HcpInstance& inst);

// thrown for unreadable/unwritable files (distinct from ParseError)
class IoError : public Error { using Error::Error; };

}  // namespace hcpcut
