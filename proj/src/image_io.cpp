#include "artss/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "artss/annot_io.hpp"
#include "artss/error.hpp"

namespace artss {
namespace {

cv::Mat decode_gray(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  const std::vector<uchar> buf(bytes.begin(), bytes.end());
  cv::Mat img;
  try {
    img = cv::imdecode(buf, cv::IMREAD_GRAYSCALE);
  } catch (const cv::Exception&) {
    img.release();
  }
  if (img.empty()) fail(ErrorKind::kIo, "cannot decode image '" + path.string() + "'");
  if (img.depth() != CV_8U) fail(ErrorKind::kIo, "'" + path.string() + "' is not 8-bit");
  return img;
}

void encode_png(const std::filesystem::path& path, const cv::Mat& img,
                const std::vector<int>& params) {
  std::vector<uchar> buf;
  if (!cv::imencode(".png", img, buf, params)) {
    fail(ErrorKind::kIo, "PNG encoding failed for '" + path.string() + "'");
  }
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(buf.data()), buf.size()));
}

}  // namespace

ImageRecord read_gray_image(const std::filesystem::path& path) {
  const cv::Mat img = decode_gray(path);
  ImageRecord rec;
  rec.id = path.stem().string();
  rec.width = img.cols;
  rec.height = img.rows;
  rec.pixels.resize(static_cast<std::size_t>(img.cols) * static_cast<std::size_t>(img.rows));
  for (int y = 0; y < img.rows; ++y) {
    const uchar* row = img.ptr<uchar>(y);
    std::copy(row, row + img.cols, rec.pixels.begin() + static_cast<std::ptrdiff_t>(y) * img.cols);
  }
  return rec;
}

void write_png(const std::filesystem::path& path, const CanonicalImage& img) {
  cv::Mat out(img.height, img.width, CV_8UC1);
  for (int y = 0; y < img.height; ++y) {
    uchar* row = out.ptr<uchar>(y);
    for (int x = 0; x < img.width; ++x) {
      row[x] = static_cast<uchar>(std::lround(std::clamp(img.at(x, y), 0.0, 1.0) * 255.0));
    }
  }
  encode_png(path, out, {cv::IMWRITE_PNG_COMPRESSION, 6});
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  cv::Mat out(mask.height, mask.width, CV_8UC1);
  for (int y = 0; y < mask.height; ++y) {
    uchar* row = out.ptr<uchar>(y);
    for (int x = 0; x < mask.width; ++x) row[x] = mask.at(x, y) ? 255 : 0;
  }
  encode_png(path, out, {cv::IMWRITE_PNG_BILEVEL, 1, cv::IMWRITE_PNG_COMPRESSION, 6});
}

BinaryMask read_mask(const std::filesystem::path& path) {
  const cv::Mat img = decode_gray(path);
  BinaryMask mask(img.cols, img.rows);
  for (int y = 0; y < img.rows; ++y) {
    const uchar* row = img.ptr<uchar>(y);
    for (int x = 0; x < img.cols; ++x) mask.at(x, y) = row[x] != 0 ? 1 : 0;
  }
  return mask;
}

}  // namespace artss
