#pragma once

// CSV and JSON serialization of lattices and lattice fields.

#include <nlohmann/json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include "field.hpp"

namespace guichard {

using json = nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// shortest decimal text that reads back to the same double
inline std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw IoError("fmt: conversion failed");
  return std::string(buf, end);
}

inline json lattice_to_json(const Lattice& lat) {
  json j;
  j["arity"] = lat.arity();
  j["n"] = {lat.n(0), lat.n(1), lat.n(2)};
  j["lo"] = {lat.lo(0), lat.lo(1), lat.lo(2)};
  j["hi"] = {lat.hi(0), lat.hi(1), lat.hi(2)};
  j["margin"] = lat.margin();
  j["fd_order"] = lat.fd_order();
  return j;
}

inline LatticePtr lattice_from_json(const json& j) {
  try {
    const auto n = j.at("n").get<std::array<int, 3>>();
    const auto lo = j.at("lo").get<std::array<double, 3>>();
    const auto hi = j.at("hi").get<std::array<double, 3>>();
    return std::make_shared<const Lattice>(j.at("arity").get<int>(), n, lo, hi, j.value("margin", -1),
                                           j.value("fd_order", 8));
  } catch (const json::exception& e) {
    throw IoError(std::string("lattice descriptor: ") + e.what());
  }
}

// grid descriptor plus row-major node values; jets fields also carry their coefficients
inline json field_to_json(const ScalarField& f, const LatticePtr& lat, bool with_jets = false) {
  json j;
  j["grid"] = lattice_to_json(*lat);
  j["values"] = f.values_on(*lat);
  if (with_jets && f.rep() == Rep::jets) {
    j["jet_degree"] = f.degree();
    j["jets"] = std::vector<double>(f.data().begin(), f.data().end());
  }
  return j;
}

inline ScalarField field_from_json(const json& j) {
  auto lat = lattice_from_json(j.at("grid"));
  try {
    if (j.contains("jets"))
      return ScalarField::jets(lat, j.at("jet_degree").get<int>(), j.at("jets").get<std::vector<double>>());
    return ScalarField::grid(lat, j.at("values").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw IoError(std::string("field descriptor: ") + e.what());
  }
}

// columns: grid indices, coordinates, value
inline void write_field_csv(std::ostream& os, const ScalarField& f, const Lattice& lat) {
  const bool three = lat.arity() == 3;
  os << (three ? "i,j,k,x,y,z,value\n" : "i,j,x,y,value\n");
  const auto v = f.values_on(lat);
  for (std::size_t t = 0; t < lat.size(); ++t) {
    const auto ix = lat.unflat(t);
    const Point p = lat.point(t);
    os << ix[0] << ',' << ix[1] << ',';
    if (three) os << ix[2] << ',';
    os << fmt(p[0]) << ',' << fmt(p[1]) << ',';
    if (three) os << fmt(p[2]) << ',';
    os << fmt(v[t]) << '\n';
  }
}

inline std::string field_csv(const ScalarField& f, const Lattice& lat) {
  std::ostringstream os;
  write_field_csv(os, f, lat);
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("write failed for " + path.string());
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline json read_json(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace guichard
