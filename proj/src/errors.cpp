#include "depprobe/errors.hpp"

namespace depprobe {

int exit_code(const Error& error) {
  if (dynamic_cast<const IoError*>(&error)) return exit_codes::kIo;
  if (dynamic_cast<const ParseError*>(&error) || dynamic_cast<const FormatError*>(&error) ||
      dynamic_cast<const StructureError*>(&error) || dynamic_cast<const VocabError*>(&error)) {
    return exit_codes::kFormat;
  }
  if (dynamic_cast<const AlignmentError*>(&error) || dynamic_cast<const CompatibilityError*>(&error)) {
    return exit_codes::kAlignment;
  }
  if (dynamic_cast<const DataError*>(&error) || dynamic_cast<const DegenerateError*>(&error) ||
      dynamic_cast<const RankError*>(&error)) {
    return exit_codes::kNumeric;
  }
  return exit_codes::kArgument;
}

}  // namespace depprobe
