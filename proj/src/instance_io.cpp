#include "tocucrl/instance_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tocucrl/keywords.hpp"

namespace tocucrl {

using nlohmann::json;

MdpInstance parse_instance_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("instance JSON: ") + e.what());
  }
  try {
    std::vector<std::string> names = doc.at("states").get<std::vector<std::string>>();
    auto index_of = [&](const std::string& name) {
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
      }
      throw UsageError("instance JSON: unknown state '" + name + "'");
    };
    const std::size_t start = index_of(doc.at("start").get<std::string>());
    const auto k = doc.at("K").get<std::size_t>();
    std::vector<std::vector<Action>> actions(names.size());
    for (const json& entry : doc.at("actions")) {
      Action act;
      const std::size_t s = index_of(entry.at("state").get<std::string>());
      act.name = entry.at("name").get<std::string>();
      act.next.assign(names.size(), 0.0);
      for (const auto& [target, prob] : entry.at("p").items()) {
        act.next[index_of(target)] += prob.get<double>();
      }
      const json& outcome = entry.at("outcome");
      const auto kind = outcome.at("kind").get<std::string>();
      if (kind == "deterministic") {
        act.outcome.kind = OutcomeKind::kDeterministic;
      } else if (kind == "bernoulli") {
        act.outcome.kind = OutcomeKind::kBernoulli;
      } else {
        throw UsageError("instance JSON: unknown outcome kind '" + kind + "'");
      }
      act.outcome.mean = outcome.at("mean").get<Vec>();
      act.null_action = entry.value("null", false);
      act.outcome_known = entry.value("known", act.null_action);
      actions[s].push_back(std::move(act));
    }
    return MdpInstance(std::move(names), start, k, std::move(actions));
  } catch (const json::exception& e) {
    throw UsageError(std::string("instance JSON: ") + e.what());
  }
}

MdpInstance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open instance file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_instance_json(buffer.str());
}

std::string to_instance_json(const MdpInstance& instance) {
  json doc;
  json names = json::array();
  for (std::size_t s = 0; s < instance.num_states(); ++s) names.push_back(instance.state_name(s));
  doc["states"] = names;
  doc["start"] = instance.state_name(instance.start());
  doc["K"] = instance.outcome_dim();
  json actions = json::array();
  for (std::size_t s = 0; s < instance.num_states(); ++s) {
    for (std::size_t a = 0; a < instance.num_actions(s); ++a) {
      const Action& act = instance.action(s, a);
      json entry;
      entry["state"] = instance.state_name(s);
      entry["name"] = act.name;
      json p = json::object();
      for (std::size_t t = 0; t < act.next.size(); ++t) {
        if (act.next[t] > 0.0) p[instance.state_name(t)] = act.next[t];
      }
      entry["p"] = p;
      entry["outcome"] = {
          {"kind", act.outcome.kind == OutcomeKind::kDeterministic ? "deterministic" : "bernoulli"},
          {"mean", act.outcome.mean}};
      if (act.null_action) entry["null"] = true;
      if (act.outcome_known && !act.null_action) entry["known"] = true;
      actions.push_back(entry);
    }
  }
  doc["actions"] = actions;
  return doc.dump(2);
}

MdpInstance instance_from_keyword(const std::string& keyword) {
  const auto [head, args] = split_keyword(keyword);
  if (head == "star") {
    const auto v = parse_size_list(args, 2, keyword);
    return build_star(v[0], v[1]);
  }
  if (head == "bandit") return build_bandit(parse_size_list(args, 1, keyword)[0]);
  if (head == "cycle") return build_cycle(parse_size_list(args, 1, keyword)[0]);
  if (head == "random") {
    const auto v = parse_size_list(args, 4, keyword);
    return build_random(v[0], v[1], v[2], v[3]);
  }
  return load_instance_file(keyword);
}

}  // namespace tocucrl
