#include "fraclab/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "fraclab/errors.hpp"
#include "json.hpp"

namespace fraclab::nn {

using nlohmann::json;

namespace {

json config_json(const NetworkConfig& c) {
  return json{{"conv1_filters", c.conv1_filters},
              {"conv2_filters", c.conv2_filters},
              {"kernel_size", c.kernel_size},
              {"lstm_layers", c.lstm_layers},
              {"lstm_units", c.lstm_units},
              {"dropout_rate", c.dropout_rate},
              {"dense_units", c.dense_units},
              {"head", to_string(c.head)},
              {"outputs", c.outputs},
              {"input_length", c.input_length}};
}

NetworkConfig config_from(const json& j) {
  NetworkConfig c;
  c.conv1_filters = j.at("conv1_filters").get<std::size_t>();
  c.conv2_filters = j.at("conv2_filters").get<std::size_t>();
  c.kernel_size = j.at("kernel_size").get<std::size_t>();
  c.lstm_layers = j.at("lstm_layers").get<std::size_t>();
  c.lstm_units = j.at("lstm_units").get<std::size_t>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.dense_units = j.at("dense_units").get<std::size_t>();
  c.head = parse_head(j.at("head").get<std::string>());
  c.outputs = j.at("outputs").get<std::size_t>();
  c.input_length = j.at("input_length").get<std::size_t>();
  c.validate();
  return c;
}

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
  template <typename U>
  U le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<U>(data_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(U);
    return v;
  }
  std::string string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == size_; }

 private:
  void need(std::size_t n) const {
    if (size_ - pos_ < n) throw CorruptionError("checkpoint ends mid-record");
  }
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::string config_to_json(const NetworkConfig& config) {
  return config_json(config).dump();
}

NetworkConfig config_from_json(const std::string& text) {
  try {
    return config_from(json::parse(text));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed network config: ") + e.what());
  }
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
  check_layout(ck.params, ck.config);
  Writer w;
  w.bytes(kCheckpointMagic, sizeof(kCheckpointMagic));
  json meta = config_json(ck.config);
  meta["rng_state"] = ck.params.rng_state;
  meta["target"] = ck.target;
  const std::string meta_text = meta.dump();
  w.le(static_cast<std::uint32_t>(meta_text.size()));
  w.bytes(meta_text.data(), meta_text.size());
  for (const auto& t : ck.params.tensors) {
    w.le(static_cast<std::uint16_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.le(static_cast<std::uint8_t>(t.value.rank()));
    for (std::size_t d : t.value.shape()) w.le(static_cast<std::uint32_t>(d));
    for (double v : t.value.data()) w.le(std::bit_cast<std::uint64_t>(v));
  }
  const std::uint32_t crc = crc32_of(w.buffer().data(), w.buffer().size());
  w.le(crc);
  return std::move(w.buffer());
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic)) {
    throw CorruptionError("checkpoint shorter than its magic header");
  }
  if (std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw VersionError("not a FRCLNN01 checkpoint (magic mismatch)");
  }
  if (bytes.size() < sizeof(kCheckpointMagic) + 8) {
    throw CorruptionError("checkpoint truncated");
  }
  const std::size_t body = bytes.size() - 4;
  Reader tail(bytes.data() + body, 4);
  if (tail.le<std::uint32_t>() != crc32_of(bytes.data(), body)) {
    throw CorruptionError("checkpoint checksum mismatch");
  }

  Reader r(bytes.data() + sizeof(kCheckpointMagic),
           body - sizeof(kCheckpointMagic));
  Checkpoint ck;
  try {
    const json meta = json::parse(r.string(r.le<std::uint32_t>()));
    ck.config = config_from(meta);
    ck.params.rng_state = meta.at("rng_state").get<std::uint64_t>();
    ck.target = meta.value("target", std::string());
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("checkpoint config block: ") + e.what());
  }
  while (!r.done()) {
    NamedTensor t;
    t.name = r.string(r.le<std::uint16_t>());
    const auto rank = r.le<std::uint8_t>();
    std::vector<std::size_t> shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      d = r.le<std::uint32_t>();
      count *= d;
    }
    std::vector<double> values(count);
    for (double& v : values) v = std::bit_cast<double>(r.le<std::uint64_t>());
    t.value = Tensor(std::move(shape), std::move(values));
    ck.params.tensors.push_back(std::move(t));
  }
  check_layout(ck.params, ck.config);
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace fraclab::nn
