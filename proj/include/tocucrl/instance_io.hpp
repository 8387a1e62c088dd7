#pragma once

#include <string>

#include "tocucrl/mdp.hpp"

namespace tocucrl {

/// Parses the JSON instance format:
///   { "states": [names], "start": name, "K": int,
///     "actions": [{ "state": name, "name": str, "p": {state: prob},
///                   "outcome": {"kind": "deterministic"|"bernoulli", "mean": [K floats]},
///                   "null": bool (optional), "known": bool (optional) }] }
/// Actions keep their file order within each state.
MdpInstance parse_instance_json(const std::string& text);

MdpInstance load_instance_file(const std::string& path);

std::string to_instance_json(const MdpInstance& instance);

/// Builder keywords: "star:K,D", "bandit:K", "cycle:D",
/// "random:S,A,K,seed"; anything else is read as an instance file path.
MdpInstance instance_from_keyword(const std::string& keyword);

}  // namespace tocucrl
