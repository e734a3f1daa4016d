#include "biorec/bundle.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <type_traits>

#include <fmt/format.h>
#include <zlib.h>

#include "biorec/error.hpp"

namespace biorec {

static_assert(std::endian::native == std::endian::little, "bundle encoding assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'B', 'I', 'O', 'R', 'E', 'C', 'M', 'B'};
constexpr std::size_t kHeaderSize = sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t);

class Writer {
 public:
  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T v) {
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }

  void put(const std::string& s) {
    put<std::uint64_t>(s.size());
    buf_.append(s);
  }

  template <typename Derived>
  void put_matrix(const Eigen::PlainObjectBase<Derived>& m) {
    put<std::int64_t>(m.rows());
    put<std::int64_t>(m.cols());
    // Element order follows the matrix storage order, which the reader shares.
    buf_.append(reinterpret_cast<const char*>(m.data()), sizeof(double) * static_cast<std::size_t>(m.size()));
  }

  std::string& bytes() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }

  std::string get_string() {
    const auto n = get<std::uint64_t>();
    return std::string(take(n), n);
  }

  template <typename M>
  M get_matrix() {
    const auto rows = get<std::int64_t>();
    const auto cols = get<std::int64_t>();
    if (rows < 0 || cols < 0 || (cols > 0 && static_cast<std::uint64_t>(rows) > remaining() / 8 / static_cast<std::uint64_t>(cols)))
      throw FormatError("bundle holds an impossible matrix size");
    M m(rows, cols);
    std::memcpy(m.data(), take(sizeof(double) * static_cast<std::size_t>(rows * cols)),
                sizeof(double) * static_cast<std::size_t>(rows * cols));
    return m;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  std::size_t remaining() const { return data_.size() - pos_; }

  const char* take(std::size_t n) {
    if (n > remaining()) throw FormatError("bundle payload ends early");
    const char* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

void put_report(Writer& w, const TrainReport& r) {
  w.put<std::int32_t>(r.epochs_run);
  w.put<std::int32_t>(r.best_epoch);
  w.put<std::int32_t>(static_cast<std::int32_t>(r.stop_reason));
  for (const auto* h : {&r.train_loss_history, &r.val_error_history, &r.val_loss_history})
    w.put_matrix(Vector(Eigen::Map<const Vector>(h->data(), static_cast<Eigen::Index>(h->size()))));
}

TrainReport get_report(Reader& r) {
  TrainReport out;
  out.epochs_run = r.get<std::int32_t>();
  out.best_epoch = r.get<std::int32_t>();
  out.stop_reason = static_cast<StopReason>(r.get<std::int32_t>());
  for (auto* h : {&out.train_loss_history, &out.val_error_history, &out.val_loss_history}) {
    const auto v = r.get_matrix<Vector>();
    h->assign(v.data(), v.data() + v.size());
  }
  return out;
}

void put_mlp(Writer& w, const MlpModel& m) {
  w.put<std::int32_t>(m.n_in);
  w.put<std::int32_t>(m.n_hidden);
  w.put<std::int32_t>(m.n_out);
  w.put<std::int32_t>(static_cast<std::int32_t>(m.activation));
  w.put<std::int32_t>(static_cast<std::int32_t>(m.output));
  w.put<std::uint64_t>(m.seed);
  w.put_matrix(m.w1);
  w.put_matrix(m.b1);
  w.put_matrix(m.w2);
  w.put_matrix(m.b2);
}

MlpModel get_mlp(Reader& r) {
  MlpModel m;
  m.n_in = r.get<std::int32_t>();
  m.n_hidden = r.get<std::int32_t>();
  m.n_out = r.get<std::int32_t>();
  m.activation = static_cast<HiddenActivation>(r.get<std::int32_t>());
  m.output = static_cast<OutputLoss>(r.get<std::int32_t>());
  m.seed = r.get<std::uint64_t>();
  m.w1 = r.get_matrix<RowMatrix>();
  m.b1 = r.get_matrix<Vector>();
  m.w2 = r.get_matrix<RowMatrix>();
  m.b2 = r.get_matrix<Vector>();
  if (m.w1.rows() != m.n_hidden || m.w1.cols() != m.n_in || m.w2.rows() != m.n_out || m.w2.cols() != m.n_hidden ||
      m.b1.size() != m.n_hidden || m.b2.size() != m.n_out)
    throw FormatError("bundle MLP shapes are inconsistent");
  return m;
}

void put_pca(Writer& w, const PcaModel& p) {
  w.put<std::uint8_t>(p.standardized ? 1 : 0);
  w.put_matrix(p.mean);
  w.put_matrix(p.scale);
  w.put_matrix(p.basis);
  w.put_matrix(p.eigenvalues);
}

PcaModel get_pca(Reader& r) {
  PcaModel p;
  p.standardized = r.get<std::uint8_t>() != 0;
  p.mean = r.get_matrix<Vector>();
  p.scale = r.get_matrix<Vector>();
  p.basis = r.get_matrix<Eigen::MatrixXd>();
  p.eigenvalues = r.get_matrix<Vector>();
  if (p.scale.size() != p.mean.size() || p.basis.rows() != p.mean.size() || p.eigenvalues.size() != p.basis.cols())
    throw FormatError("bundle PCA shapes are inconsistent");
  return p;
}

std::string encode_payload(const ModelBundle& b) {
  const auto& p = b.pipeline;
  Writer w;
  w.put(b.config_yaml);
  w.put<std::uint64_t>(p.category_names.size());
  for (const auto& name : p.category_names) w.put(name);
  w.put<std::uint8_t>(p.resize_to ? 1 : 0);
  w.put<std::int32_t>(p.resize_to ? p.resize_to->height : 0);
  w.put<std::int32_t>(p.resize_to ? p.resize_to->width : 0);
  w.put<std::int32_t>(p.image_size.height);
  w.put<std::int32_t>(p.image_size.width);

  const auto& f = p.features;
  w.put<std::int32_t>(static_cast<std::int32_t>(f.normalization.variant));
  w.put<std::int32_t>(f.normalization.ln_window);
  for (int v : {f.lbp.points, f.lbp.radius, f.lbp.grid_y, f.lbp.grid_x, f.hog.cell_y, f.hog.cell_x})
    w.put<std::int32_t>(v);

  w.put<std::uint64_t>(p.channels.size());
  for (const auto& c : p.channels) {
    w.put<std::int32_t>(static_cast<std::int32_t>(c.channel));
    put_pca(w, c.pca);
    put_mlp(w, c.mlp);
    put_report(w, c.report);
  }

  w.put<std::int32_t>(static_cast<std::int32_t>(p.fusion));
  w.put<std::uint8_t>(p.fhn ? 1 : 0);
  if (p.fhn) {
    const auto& h = *p.fhn;
    w.put<std::int32_t>(static_cast<std::int32_t>(h.mode));
    w.put<std::uint64_t>(h.input_sizes.size());
    for (std::size_t k = 0; k < h.input_sizes.size(); ++k) {
      w.put<std::int32_t>(h.input_sizes[k]);
      w.put<std::int32_t>(h.hidden_sizes[k]);
    }
    put_mlp(w, h.net);
    put_report(w, p.fhn_report);
  }
  return std::move(w.bytes());
}

ModelBundle decode_payload(std::string_view payload, std::uint32_t version) {
  Reader r(payload);
  ModelBundle b;
  b.version = version;
  b.config_yaml = r.get_string();
  auto& p = b.pipeline;
  const auto n_names = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < n_names; ++i) p.category_names.push_back(r.get_string());
  const bool resized = r.get<std::uint8_t>() != 0;
  const ImageSize resize{r.get<std::int32_t>(), r.get<std::int32_t>()};
  if (resized) p.resize_to = resize;
  p.image_size.height = r.get<std::int32_t>();
  p.image_size.width = r.get<std::int32_t>();

  auto& f = p.features;
  f.normalization.variant = static_cast<Normalization>(r.get<std::int32_t>());
  f.normalization.ln_window = r.get<std::int32_t>();
  f.lbp.points = r.get<std::int32_t>();
  f.lbp.radius = r.get<std::int32_t>();
  f.lbp.grid_y = r.get<std::int32_t>();
  f.lbp.grid_x = r.get<std::int32_t>();
  f.hog.cell_y = r.get<std::int32_t>();
  f.hog.cell_x = r.get<std::int32_t>();

  const auto n_channels = r.get<std::uint64_t>();
  if (n_channels > 3) throw FormatError("bundle declares too many channels");
  f.channels.clear();
  for (std::uint64_t k = 0; k < n_channels; ++k) {
    ChannelModel c;
    c.channel = static_cast<Channel>(r.get<std::int32_t>());
    c.pca = get_pca(r);
    c.mlp = get_mlp(r);
    c.report = get_report(r);
    f.channels.push_back(c.channel);
    p.channels.push_back(std::move(c));
  }

  p.fusion = static_cast<FusionMode>(r.get<std::int32_t>());
  if (r.get<std::uint8_t>() != 0) {
    FusedHybridNetwork h;
    h.mode = static_cast<FusionMode>(r.get<std::int32_t>());
    const auto blocks = r.get<std::uint64_t>();
    if (blocks > 3) throw FormatError("bundle declares too many fused blocks");
    for (std::uint64_t k = 0; k < blocks; ++k) {
      h.input_sizes.push_back(r.get<std::int32_t>());
      h.hidden_sizes.push_back(r.get<std::int32_t>());
    }
    h.net = get_mlp(r);
    h.mask = block_mask(h.input_sizes, h.hidden_sizes);
    if (h.mask.rows() != h.net.n_hidden || h.mask.cols() != h.net.n_in)
      throw FormatError("bundle fused-network blocks do not match its weights");
    p.fhn = std::move(h);
    p.fhn_report = get_report(r);
  }
  if (!r.done()) throw FormatError("bundle payload has trailing bytes");
  return b;
}

std::uint32_t crc_of(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size()));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::string encode_bundle(const ModelBundle& bundle) {
  const std::string payload = encode_payload(bundle);
  Writer w;
  w.bytes().append(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(bundle.version);
  w.put<std::uint64_t>(payload.size());
  w.bytes().append(payload);
  w.put<std::uint32_t>(crc_of(payload));
  return std::move(w.bytes());
}

ModelBundle decode_bundle(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw FormatError("not a model bundle (bad magic)");
  if (bytes.size() < kHeaderSize) throw FormatError("bundle checksum mismatch: header truncated");
  Reader header(std::string_view(bytes).substr(sizeof(kMagic), kHeaderSize - sizeof(kMagic)));
  const auto version = header.get<std::uint32_t>();
  if (version != ModelBundle::kFormatVersion)
    throw FormatError(fmt::format("bundle format version {} is not supported (expected {})", version,
                                  ModelBundle::kFormatVersion));
  const auto size = header.get<std::uint64_t>();
  if (bytes.size() != kHeaderSize + size + sizeof(std::uint32_t))
    throw FormatError("bundle checksum mismatch: file truncated or padded");
  const std::string_view payload = std::string_view(bytes).substr(kHeaderSize, size);
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + kHeaderSize + size, sizeof(stored));
  if (stored != crc_of(payload)) throw FormatError("bundle checksum mismatch: file corrupt");
  return decode_payload(payload, version);
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  const auto bytes = encode_bundle(bundle);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write bundle {}", path.string()));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(fmt::format("failed writing bundle {}", path.string()));
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open bundle {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return decode_bundle(buf.str());
}

}  // namespace biorec
