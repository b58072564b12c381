#include "gfflab/field.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace gfflab::gff {

void FieldSample::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("FieldSample: cannot open " + path);
  nlohmann::json hdr{{"d", box.dim()},
                     {"N", box.radius()},
                     {"seed", seed},
                     {"stream", stream},
                     {"level", level}};
  os << hdr.dump() << '\n';
  os.write(reinterpret_cast<const char*>(values.data()),
           static_cast<std::streamsize>(values.size() * sizeof(double)));
}

FieldSample FieldSample::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("FieldSample: cannot open " + path);
  std::string line;
  std::getline(is, line);
  const nlohmann::json hdr = nlohmann::json::parse(line);
  FieldSample f;
  f.box = lattice::BoxGeom(hdr.at("d").get<int>(), hdr.at("N").get<int>());
  f.seed = hdr.at("seed").get<std::uint64_t>();
  f.stream = hdr.at("stream").get<std::uint64_t>();
  f.level = hdr.value("level", 0.0);
  f.values.resize(f.box.vertex_count());
  is.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!is) throw std::runtime_error("FieldSample: truncated file " + path);
  return f;
}

FieldSample shift_level(const FieldSample& field, double h) {
  FieldSample out = field;
  out.level = h;
  return out;
}

}  // namespace gfflab::gff
