#pragma once

#include <string>
#include <string_view>

#include "mldes/model.hh"

namespace mldes {

/// Parses the line-oriented model format:
///
///     events
///       start controllable
///       done uncontrollable
///     end
///     plant Machine
///       location Idle initial marked
///         edge start goto Busy
///       location Busy
///         edge done goto Idle
///     end
///     requirement NoStartWhileBusy
///       invariant start needs Machine.Idle and not Buffer.Full
///     end
///
/// `alphabet e1 e2 ...` inside an automaton adds events that have no edge
/// (they are then always blocked by it). Errors carry line and column.
ModelSet parse_model(std::string_view text);

/// Accepts either format; JSON is detected by a leading '{'.
ModelSet parse_model_any(std::string_view text);

ModelSet parse_model_json(std::string_view text);

std::string serialize_model(const ModelSet& model);
std::string serialize_model_json(const ModelSet& model);

/// Parses a predicate such as `A.Idle and not (B.Busy or C.Done)` against
/// the plants of `model`.
Predicate parse_predicate(std::string_view text, const ModelSet& model);
std::string format_predicate(const Predicate& p, const ModelSet& model);

ModelSet load_model_file(const std::string& path);

} // namespace mldes
