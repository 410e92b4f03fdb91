#pragma once

#include <string>

#include "depprobe/probe.hpp"

namespace depprobe {

/// Probe checkpoint container: a JSON object with a base64 payload per map.
///
///   {
///     "format": "depprobe-checkpoint", "version": 1,
///     "kind": "depprobe" | "dirprobe",
///     "e": int, "b": int, "c": int | null, "l": int | null,
///     "layers": {"structural": int, "relational": int | null, "depth": int | null},
///     "relations": [37 labels in vocabulary order],
///     "matrices": {
///       "structural": {"rows": e, "cols": b, "encoding": "f64le-rowmajor-base64", "data": "..."},
///       "relational": {...} | null,
///       "depth": {...} | null
///     }
///   }
///
/// Keys are emitted in sorted order so the serialization is byte-deterministic.
std::string serialize_checkpoint(const ProbeModel& model);
ProbeModel deserialize_checkpoint(const std::string& text);

void save_checkpoint(const ProbeModel& model, const std::string& path);
ProbeModel load_checkpoint(const std::string& path);

}  // namespace depprobe
