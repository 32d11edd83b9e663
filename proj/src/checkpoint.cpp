#include "qsan/checkpoint.hpp"

#include "qsan/errors.hpp"
#include "qsan/io_util.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>

#include <json.hpp>

namespace qsan {

using nlohmann::json;

namespace {

void put_f64(std::string& buf, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    buf.push_back(static_cast<char>(bits & 0xFF));
    bits >>= 8;
  }
}

double get_f64(const std::string& buf, size_t pos) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) {
    bits = (bits << 8) | static_cast<unsigned char>(buf[pos + static_cast<size_t>(i)]);
  }
  return std::bit_cast<double>(bits);
}

void put_plane(std::string& buf, const RMat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(buf, m(r, c));
  }
}

RMat get_plane(const std::string& buf, size_t& pos, Eigen::Index rows, Eigen::Index cols) {
  RMat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = get_f64(buf, pos);
      pos += 8;
    }
  }
  return m;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Model& model) {
  std::string payload;
  json tensors = json::array();
  for (const auto& p : model.params().items()) {
    tensors.push_back(json{{"name", p.name},
                           {"rows", p.value.rows()},
                           {"cols", p.value.cols()},
                           {"complex", p.is_complex},
                           {"trainable", p.trainable},
                           {"offset", payload.size()}});
    put_plane(payload, p.value.re);
    if (p.is_complex) put_plane(payload, p.value.im);
  }
  const json header{{"format", "qsan-checkpoint"},
                    {"version", kCheckpointVersion},
                    {"config", model.config().to_json()},
                    {"vocab", model.vocab().tokens},
                    {"tensors", tensors},
                    {"payload_bytes", payload.size()}};
  out.write(kCheckpointMagic, 8);
  out << header.dump() << '\n';
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

Model read_checkpoint(std::istream& in) {
  char magic[8] = {};
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw CheckpointError("not a checkpoint: bad magic");
  }
  std::string line;
  if (!std::getline(in, line)) throw CheckpointError("truncated checkpoint: missing header");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  }

  try {
    if (header.value("format", "") != "qsan-checkpoint") {
      throw CheckpointError("unrecognized checkpoint format");
    }
    const int version = header.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto payload_bytes = header.at("payload_bytes").get<size_t>();
    std::string payload(payload_bytes, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(payload_bytes));
    if (static_cast<size_t>(in.gcount()) != payload_bytes) {
      throw CheckpointError("truncated checkpoint payload: expected " +
                            std::to_string(payload_bytes) + " bytes, got " +
                            std::to_string(in.gcount()));
    }

    const TrainConfig config = TrainConfig::from_json(header.at("config"));
    Vocabulary vocab;
    for (const auto& t : header.at("vocab")) vocab.add(t.get<std::string>());

    ParamStore params;
    for (const auto& t : header.at("tensors")) {
      const auto rows = t.at("rows").get<Eigen::Index>();
      const auto cols = t.at("cols").get<Eigen::Index>();
      const bool is_complex = t.at("complex").get<bool>();
      size_t pos = t.at("offset").get<size_t>();
      const size_t need = static_cast<size_t>(rows * cols) * 8 * (is_complex ? 2 : 1);
      if (rows < 0 || cols < 0 || pos + need > payload_bytes) {
        throw CheckpointError("tensor " + t.at("name").get<std::string>() +
                              " lies outside the payload");
      }
      RMat re = get_plane(payload, pos, rows, cols);
      RMat im = is_complex ? get_plane(payload, pos, rows, cols) : RMat::Zero(rows, cols);
      params.add(t.at("name").get<std::string>(), CMat(std::move(re), std::move(im)), is_complex,
                 t.at("trainable").get<bool>());
    }
    return Model(config, std::move(vocab), std::move(params));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("invalid checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) { write_checkpoint(out, model); }, true);
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  return read_checkpoint(in);
}

}  // namespace qsan
