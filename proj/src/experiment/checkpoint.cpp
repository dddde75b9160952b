#include "qdn/experiment/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

namespace qdn {

namespace {

template <typename U>
void put(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename U>
  U take(const std::string& what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }

  std::string take_string(std::size_t n, const std::string& what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n, const std::string& what) const {
    if (bytes_.size() - pos_ < n) {
      throw CheckpointError("truncated checkpoint: " + what + " needs " + std::to_string(n) +
                            " bytes at offset " + std::to_string(pos_) + ", " +
                            std::to_string(bytes_.size() - pos_) + " left");
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const std::vector<Tensor>& tensors) {
  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  std::set<std::string> names;
  for (const auto& t : tensors) {
    if (!names.insert(t.name).second) throw CheckpointError("duplicate tensor name '" + t.name + "'");
    if (t.name.size() > 0xffff) throw CheckpointError("tensor name too long: " + t.name.substr(0, 40));
    if (t.extents.size() > 0xff) throw CheckpointError("tensor '" + t.name + "' has too many dimensions");
    std::uint64_t count = 1;
    for (auto e : t.extents) count *= e;
    if (count != t.values.size()) {
      throw CheckpointError("tensor '" + t.name + "' has " + std::to_string(t.values.size()) +
                            " values for " + std::to_string(count) + " elements");
    }
    put<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put<std::uint8_t>(out, static_cast<std::uint8_t>(t.extents.size()));
    for (auto e : t.extents) put<std::uint32_t>(out, e);
    for (float v : t.values) put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

std::vector<Tensor> decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  const std::string magic = r.take_string(sizeof(kCheckpointMagic), "magic");
  if (std::memcmp(magic.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw CheckpointError("bad checkpoint magic: not a QDNCKPT1 file");
  }
  const auto version = r.take<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const auto count = r.take<std::uint32_t>("tensor count");
  std::vector<Tensor> out;
  std::set<std::string> names;
  for (std::uint32_t i = 0; i < count; ++i) {
    Tensor t;
    const auto len = r.take<std::uint16_t>("name length of tensor " + std::to_string(i));
    t.name = r.take_string(len, "name of tensor " + std::to_string(i));
    if (!names.insert(t.name).second) throw CheckpointError("duplicate tensor name '" + t.name + "'");
    const auto rank = r.take<std::uint8_t>("rank of '" + t.name + "'");
    std::uint64_t elements = 1;
    for (int d = 0; d < rank; ++d) {
      t.extents.push_back(r.take<std::uint32_t>("extents of '" + t.name + "'"));
      elements *= t.extents.back();
    }
    if (elements * 4 > bytes.size() - r.position()) {
      throw CheckpointError("truncated checkpoint: tensor '" + t.name + "' needs " +
                            std::to_string(elements * 4) + " value bytes, " +
                            std::to_string(bytes.size() - r.position()) + " left");
    }
    t.values.reserve(static_cast<std::size_t>(elements));
    for (std::uint64_t k = 0; k < elements; ++k) {
      t.values.push_back(std::bit_cast<float>(r.take<std::uint32_t>("values of '" + t.name + "'")));
    }
    out.push_back(std::move(t));
  }
  if (!r.done()) throw CheckpointError("trailing bytes after the last tensor");
  return out;
}

void write_checkpoint(const std::filesystem::path& path, const std::vector<Tensor>& tensors) {
  const auto bytes = encode_checkpoint(tensors);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed: " + path.string());
}

std::vector<Tensor> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

std::vector<Tensor> store_tensors(const ParameterStore& store) {
  std::vector<Tensor> out;
  for (const auto& [name, entry] : store) {
    Tensor t;
    t.name = name;
    t.extents = {static_cast<std::uint32_t>(entry.value.rows()), static_cast<std::uint32_t>(entry.value.cols())};
    t.values.reserve(static_cast<std::size_t>(entry.value.size()));
    for (Index i = 0; i < entry.value.size(); ++i) t.values.push_back(static_cast<float>(entry.value.data()[i]));
    out.push_back(std::move(t));
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store) {
  write_checkpoint(path, store_tensors(store));
}

void load_checkpoint(const std::filesystem::path& path, ParameterStore& store) {
  const auto tensors = read_checkpoint(path);
  if (tensors.size() != store.size()) {
    throw CheckpointError(path.string() + ": holds " + std::to_string(tensors.size()) +
                          " tensors, the network has " + std::to_string(store.size()));
  }
  for (const auto& t : tensors) {
    if (!store.contains(t.name)) throw CheckpointError(path.string() + ": unexpected tensor '" + t.name + "'");
    auto& entry = store.entry(t.name);
    if (t.extents.size() != 2 || t.extents[0] != entry.value.rows() || t.extents[1] != entry.value.cols()) {
      throw CheckpointError(path.string() + ": tensor '" + t.name + "' shape does not match " +
                            shape_string(entry.value));
    }
  }
  for (const auto& t : tensors) {
    auto& entry = store.entry(t.name);
    for (Index i = 0; i < entry.value.size(); ++i) entry.value.data()[i] = t.values[static_cast<std::size_t>(i)];
    entry.first_moment.setZero();
    entry.second_moment.setZero();
    entry.step = 0;
  }
}

}  // namespace qdn
