#pragma once

// Fixture exchange: masker export/import (binary containers plus a JSON
// descriptor) and commodity export with owner-tagged cards.

#include <fstream>

#include <nlohmann/json.hpp>

#include "qott/masker.hpp"
#include "qott/qott.hpp"
#include "qott/serialize.hpp"

namespace qott {

inline nlohmann::json masker_descriptor(const Masker& m) {
  nlohmann::json j;
  j["family"] = m.family;
  j["d"] = m.d.d;
  j["layout"] = {{"out_a", m.out_a},
                 {"out_b", m.out_b},
                 {"safe_labels", m.safe_labels}};
  return j;
}

/// Writes <prefix>.json, <prefix>.unitary.bin, <prefix>.safe.bin.
inline void save_masker(const Masker& m, const std::string& prefix) {
  nlohmann::json j = masker_descriptor(m);
  j["files"] = {{"unitary", prefix + ".unitary.bin"},
                {"safe", prefix + ".safe.bin"}};
  std::ofstream out(prefix + ".json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + prefix + ".json");
  out << j.dump(2) << '\n';
  save_file(prefix + ".unitary.bin", m.unitary);
  save_file(prefix + ".safe.bin", m.safe);
}

inline Masker load_masker(const std::string& prefix) {
  std::ifstream in(prefix + ".json", std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + prefix + ".json");
  nlohmann::json j = nlohmann::json::parse(in);
  return Masker{
      Dim(j.at("d").get<int>()),
      j.at("family").get<std::string>(),
      load_file<Unitary>(j.at("files").at("unitary").get<std::string>()),
      load_file<DensityOperator>(j.at("files").at("safe").get<std::string>()),
      j.at("layout").at("safe_labels").get<std::vector<std::string>>(),
      j.at("layout").at("out_a").get<std::vector<std::string>>(),
      j.at("layout").at("out_b").get<std::vector<std::string>>()};
}

/// Commodity export: the state container plus a cards JSON where each card
/// is tagged with the party allowed to see it.
inline void save_commodity(const QottCommodity& c, const std::string& prefix) {
  save_file(prefix + ".state.bin", c.state);
  nlohmann::json j;
  j["cards"] = {
      {"i1", {{"value", c.cards.i1}, {"owner", "alice"}}},
      {"i2", {{"value", c.cards.i2}, {"owner", "alice"}}},
      {"j1", {{"value", c.cards.j1}, {"owner", "bob"}}},
      {"j2", {{"value", c.cards.j2}, {"owner", "bob"}}},
  };
  j["files"] = {{"state", prefix + ".state.bin"}};
  std::ofstream out(prefix + ".json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + prefix + ".json");
  out << j.dump(2) << '\n';
}

inline QottCommodity load_commodity(const std::string& prefix) {
  std::ifstream in(prefix + ".json", std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + prefix + ".json");
  nlohmann::json j = nlohmann::json::parse(in);
  QottCommodity c;
  c.state = load_file<PureState>(j.at("files").at("state").get<std::string>());
  c.cards.i1 = j.at("cards").at("i1").at("value").get<int>();
  c.cards.i2 = j.at("cards").at("i2").at("value").get<int>();
  c.cards.j1 = j.at("cards").at("j1").at("value").get<int>();
  c.cards.j2 = j.at("cards").at("j2").at("value").get<int>();
  return c;
}

}  // namespace qott
