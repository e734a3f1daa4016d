#include "biorec/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "biorec/error.hpp"

namespace biorec {

namespace fs = std::filesystem;

void ImageSet::validate() const {
  if (labels.size() != images.size()) throw DataError("label count differs from image count");
  if (!source_paths.empty() && source_paths.size() != images.size())
    throw DataError("source path count differs from image count");
  const int c = num_categories();
  std::vector<int> seen(static_cast<std::size_t>(c), 0);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    if (img.rows() != height || img.cols() != width)
      throw DataError(fmt::format("image {} is {}x{}, expected {}x{}", i, img.rows(), img.cols(),
                                  height, width));
    if (img.size() > 0 && (img.minCoeff() < 0.0 || img.maxCoeff() > 1.0))
      throw DataError(fmt::format("image {} has intensities outside [0,1]", i));
    if (labels[i] < 0 || labels[i] >= c) throw DataError(fmt::format("label {} out of range", i));
    ++seen[static_cast<std::size_t>(labels[i])];
  }
  for (int k = 0; k < c; ++k)
    if (seen[static_cast<std::size_t>(k)] == 0)
      throw DataError(fmt::format("category '{}' has no images", category_names[k]));
}

ImageSet ImageSet::subset(const std::vector<std::size_t>& indices) const {
  ImageSet out;
  out.category_names = category_names;
  out.height = height;
  out.width = width;
  out.images.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (auto i : indices) {
    out.images.push_back(images.at(i));
    out.labels.push_back(labels.at(i));
    if (!source_paths.empty()) out.source_paths.push_back(source_paths.at(i));
  }
  return out;
}

Image rgb_to_gray(const std::vector<double>& interleaved, int height, int width, int channels) {
  if (channels != 1 && channels != 3 && channels != 4)
    throw DataError(fmt::format("unsupported channel count {}", channels));
  if (interleaved.size() != static_cast<std::size_t>(height) * width * channels)
    throw DataError("raster size does not match dimensions");
  Image out(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double* px = &interleaved[(static_cast<std::size_t>(y) * width + x) * channels];
      out(y, x) = channels == 1 ? px[0] : 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    }
  }
  return out;
}

Image resize_bilinear(const Image& image, ImageSize size) {
  if (size.height <= 0 || size.width <= 0) throw InvalidArgument("resize target must be positive");
  if (image.size() == 0) throw InvalidArgument("cannot resize an empty image");
  const auto in_h = image.rows();
  const auto in_w = image.cols();
  if (in_h == size.height && in_w == size.width) return image;

  auto source = [](int dst, Eigen::Index in, int out, Eigen::Index& i0, Eigen::Index& i1,
                   double& t) {
    double s = (dst + 0.5) * static_cast<double>(in) / out - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in - 1));
    i0 = static_cast<Eigen::Index>(std::floor(s));
    i1 = std::min(i0 + 1, in - 1);
    t = s - static_cast<double>(i0);
  };

  Image out(size.height, size.width);
  for (int y = 0; y < size.height; ++y) {
    Eigen::Index y0, y1;
    double ty;
    source(y, in_h, size.height, y0, y1, ty);
    for (int x = 0; x < size.width; ++x) {
      Eigen::Index x0, x1;
      double tx;
      source(x, in_w, size.width, x0, x1, tx);
      const double top = (1 - tx) * image(y0, x0) + tx * image(y0, x1);
      const double bottom = (1 - tx) * image(y1, x0) + tx * image(y1, x1);
      out(y, x) = (1 - ty) * top + ty * bottom;
    }
  }
  return out;
}

Image read_image(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw DataError(fmt::format("no such image: {}", path.string()));
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_ANYDEPTH | cv::IMREAD_ANYCOLOR);
  if (mat.empty()) throw DataError(fmt::format("cannot decode image: {}", path.string()));

  double full_scale = 0;
  switch (mat.depth()) {
    case CV_8U: full_scale = 255.0; break;
    case CV_16U: full_scale = 65535.0; break;
    default: throw DataError(fmt::format("unsupported pixel depth in {}", path.string()));
  }
  const int channels = mat.channels();
  std::vector<double> raster(static_cast<std::size_t>(mat.rows) * mat.cols * channels);
  std::size_t k = 0;
  for (int y = 0; y < mat.rows; ++y) {
    for (int x = 0; x < mat.cols; ++x) {
      for (int c = 0; c < channels; ++c) {
        // OpenCV stores colour as BGR(A); reorder to RGB(A).
        const int src = (channels >= 3 && c < 3) ? 2 - c : c;
        const double v = mat.depth() == CV_8U ? mat.ptr<std::uint8_t>(y)[x * channels + src]
                                              : mat.ptr<std::uint16_t>(y)[x * channels + src];
        raster[k++] = v / full_scale;
      }
    }
  }
  return rgb_to_gray(raster, mat.rows, mat.cols, channels);
}

void write_image(const fs::path& path, const Image& image) {
  cv::Mat mat(static_cast<int>(image.rows()), static_cast<int>(image.cols()), CV_8UC1);
  for (int y = 0; y < mat.rows; ++y)
    for (int x = 0; x < mat.cols; ++x)
      mat.at<std::uint8_t>(y, x) =
          static_cast<std::uint8_t>(std::lround(std::clamp(image(y, x), 0.0, 1.0) * 255.0));
  if (!cv::imwrite(path.string(), mat))
    throw DataError(fmt::format("cannot write image: {}", path.string()));
}

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".pgm" || ext == ".pnm" || ext == ".png" || ext == ".jpg" || ext == ".jpeg" ||
         ext == ".bmp" || ext == ".tif" || ext == ".tiff";
}

bool is_hidden(const fs::path& p) {
  const auto name = p.filename().string();
  return !name.empty() && name.front() == '.';
}

}  // namespace

ImageSet load_dataset(const fs::path& root, std::optional<ImageSize> resize_to) {
  if (!fs::is_directory(root)) throw DataError(fmt::format("not a directory: {}", root.string()));

  std::vector<fs::path> categories;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory() && !is_hidden(entry.path())) categories.push_back(entry.path());
  if (categories.empty()) throw DataError("no categories found");
  std::sort(categories.begin(), categories.end());

  ImageSet set;
  for (std::size_t label = 0; label < categories.size(); ++label) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(categories[label]))
      if (entry.is_regular_file() && !is_hidden(entry.path()) && is_image_file(entry.path()))
        files.push_back(entry.path());
    if (files.empty())
      throw DataError(fmt::format("category '{}' has no images",
                                  categories[label].filename().string()));
    std::sort(files.begin(), files.end());

    set.category_names.push_back(categories[label].filename().string());
    for (const auto& file : files) {
      Image img = read_image(file);
      if (resize_to) img = resize_bilinear(img, *resize_to);
      set.images.push_back(std::move(img));
      set.labels.push_back(static_cast<int>(label));
      set.source_paths.push_back(file.string());
    }
  }

  set.height = static_cast<int>(set.images.front().rows());
  set.width = static_cast<int>(set.images.front().cols());
  for (std::size_t i = 0; i < set.images.size(); ++i) {
    if (set.images[i].rows() != set.height || set.images[i].cols() != set.width)
      throw DataError(fmt::format("mixed image dimensions: {} is {}x{}, expected {}x{}",
                                  set.source_paths[i], set.images[i].rows(),
                                  set.images[i].cols(), set.height, set.width));
  }
  return set;
}

}  // namespace biorec
