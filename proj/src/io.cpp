#include "gave/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "gave/error.hpp"

namespace gave {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
    auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
    if (buf) *buf = msg;
    png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

std::string read_text(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, std::string("cannot open ") + what + " " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& text, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

PngImage read_png(const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw Error(ErrorKind::Io, "cannot open image " + path);
    png_byte sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw Error(ErrorKind::Format, "not a PNG file: " + path);

    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_warn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(ErrorKind::Io, "libpng initialization failed");
    }

    PngImage image;
    std::vector<png_bytep> rows;
    std::vector<png_byte> pixels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorKind::Format, "corrupt PNG " + path + ": " + message);
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (depth == 16) png_set_swap(png);
    png_read_update_info(png, info);

    image.width = png_get_image_width(png, info);
    image.height = png_get_image_height(png, info);
    image.channels = png_get_channels(png, info);
    image.bit_depth = png_get_bit_depth(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    pixels.resize(rowbytes * image.height);
    rows.resize(image.height);
    for (std::size_t y = 0; y < image.height; ++y) rows[y] = pixels.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const std::size_t n = image.width * image.height * image.channels;
    image.samples.resize(n);
    if (image.bit_depth == 16) {
        for (std::size_t i = 0; i < n; ++i)
            image.samples[i] = static_cast<std::uint16_t>(pixels[2 * i] | (pixels[2 * i + 1] << 8));
    } else {
        for (std::size_t i = 0; i < n; ++i) image.samples[i] = pixels[i];
    }
    return image;
}

void write_png(const PngImage& image, const std::string& path) {
    if (image.channels != 1 && image.channels != 3)
        throw Error(ErrorKind::InvalidArgument, "only 1- or 3-channel PNG output is supported");
    if (image.bit_depth != 8 && image.bit_depth != 16)
        throw Error(ErrorKind::InvalidArgument, "PNG bit depth must be 8 or 16");
    if (image.samples.size() != image.width * image.height * image.channels)
        throw Error(ErrorKind::ShapeMismatch, "PNG sample buffer does not match extents");
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw Error(ErrorKind::Io, "cannot write image " + path);

    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_warn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorKind::Io, "libpng initialization failed");
    }
    const std::size_t bytes_per_sample = image.bit_depth / 8;
    const std::size_t rowbytes = image.width * image.channels * bytes_per_sample;
    std::vector<png_byte> pixels(rowbytes * image.height);
    for (std::size_t i = 0; i < image.samples.size(); ++i) {
        if (bytes_per_sample == 2) {
            pixels[2 * i] = static_cast<png_byte>(image.samples[i] >> 8);  // PNG is big-endian
            pixels[2 * i + 1] = static_cast<png_byte>(image.samples[i] & 0xFF);
        } else {
            pixels[i] = static_cast<png_byte>(image.samples[i]);
        }
    }
    std::vector<png_bytep> rows(image.height);
    for (std::size_t y = 0; y < image.height; ++y) rows[y] = pixels.data() + y * rowbytes;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::Io, "failed writing PNG " + path + ": " + message);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height),
                 image.bit_depth, image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Intrinsics load_intrinsics(const std::string& path) {
    std::istringstream in(read_text(path, "intrinsics file"));
    Intrinsics intr;
    unsigned seen = 0;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        for (char& c : line)
            if (c == '=' || c == ':') c = ' ';
        std::istringstream ls(line);
        std::string key;
        double value = 0;
        if (!(ls >> key)) continue;
        if (!(ls >> value))
            throw Error(ErrorKind::Format, path + " line " + std::to_string(lineno) + ": missing value for " + key);
        if (key == "fx") intr.fx = value, seen |= 1;
        else if (key == "fy") intr.fy = value, seen |= 2;
        else if (key == "cx") intr.cx = value, seen |= 4;
        else if (key == "cy") intr.cy = value, seen |= 8;
        else if (key == "width") intr.width = static_cast<std::size_t>(value), seen |= 16;
        else if (key == "height") intr.height = static_cast<std::size_t>(value), seen |= 32;
        else throw Error(ErrorKind::Format, path + " line " + std::to_string(lineno) + ": unknown key " + key);
    }
    if (seen != 63) throw Error(ErrorKind::Format, path + ": intrinsics need fx, fy, cx, cy, width, height");
    intr.validate();
    return intr;
}

void save_intrinsics(const Intrinsics& intr, const std::string& path) {
    std::ostringstream os;
    os << "fx=" << fmt(intr.fx) << "\nfy=" << fmt(intr.fy) << "\ncx=" << fmt(intr.cx) << "\ncy=" << fmt(intr.cy)
       << "\nwidth=" << intr.width << "\nheight=" << intr.height << "\n";
    write_text(os.str(), path);
}

RgbdFrame load_rgbd(const std::string& rgb_path, const std::string& depth_path, const Intrinsics& intr) {
    const PngImage rgb = read_png(rgb_path);
    const PngImage depth = read_png(depth_path);
    if (rgb.channels != 3 || rgb.bit_depth != 8)
        throw Error(ErrorKind::Format, rgb_path + ": color image must be 8-bit RGB");
    if (depth.channels != 1 || depth.bit_depth != 16)
        throw Error(ErrorKind::Format, depth_path + ": depth image must be 16-bit single-channel");
    if (rgb.width != depth.width || rgb.height != depth.height)
        throw Error(ErrorKind::ShapeMismatch, "color " + std::to_string(rgb.width) + "x" +
                                                  std::to_string(rgb.height) + " vs depth " +
                                                  std::to_string(depth.width) + "x" + std::to_string(depth.height));
    if (intr.width != rgb.width || intr.height != rgb.height)
        throw Error(ErrorKind::ShapeMismatch, "intrinsics extents do not match the images");

    RgbdFrame frame = RgbdFrame::blank(intr);
    for (std::size_t i = 0; i < frame.rgb.size(); ++i) frame.rgb[i] = static_cast<float>(rgb.samples[i]) / 255.0f;
    for (std::size_t i = 0; i < frame.depth.size(); ++i)
        frame.depth[i] = static_cast<float>(depth.samples[i]) / 1000.0f;
    frame.refresh_mask();
    return crop_to_multiple_of_8(frame);
}

void save_rgbd(const RgbdFrame& frame, const std::string& rgb_path, const std::string& depth_path) {
    PngImage rgb{frame.width, frame.height, 3, 8, {}};
    rgb.samples.resize(frame.rgb.size());
    for (std::size_t i = 0; i < frame.rgb.size(); ++i)
        rgb.samples[i] = static_cast<std::uint16_t>(std::lround(std::clamp(frame.rgb[i], 0.0f, 1.0f) * 255.0f));
    PngImage depth{frame.width, frame.height, 1, 16, {}};
    depth.samples.resize(frame.depth.size());
    for (std::size_t i = 0; i < frame.depth.size(); ++i) {
        const long mm = frame.valid[i] ? std::lround(static_cast<double>(frame.depth[i]) * 1000.0) : 0;
        depth.samples[i] = static_cast<std::uint16_t>(std::clamp(mm, 0L, 65535L));
    }
    write_png(rgb, rgb_path);
    write_png(depth, depth_path);
}

std::string format_pose(const Pose& pose) {
    const Mat4 m = pose.matrix();
    std::string out;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) out += fmt(m(r, c)) + (c == 3 ? "\n" : " ");
    }
    return out;
}

void save_pose(const Pose& pose, const std::string& path) { write_text(format_pose(pose), path); }

Pose load_pose(const std::string& path) {
    std::istringstream in(read_text(path, "pose file"));
    Mat4 m;
    for (int i = 0; i < 16; ++i) {
        if (!(in >> m(i / 4, i % 4)))
            throw Error(ErrorKind::Format, path + ": expected 16 reals, got " + std::to_string(i));
    }
    std::string extra;
    if (in >> extra) throw Error(ErrorKind::Format, path + ": trailing data after 16 reals");
    Pose pose = Pose::from_matrix(m);
    if (!pose.is_valid(1e-5)) throw Error(ErrorKind::Format, path + ": matrix is not a rigid transform");
    return pose;
}

void save_ply(const PointCloud& cloud, const std::string& path) {
    cloud.validate();
    std::ostringstream os;
    os << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << "\n"
       << "property double x\nproperty double y\nproperty double z\n";
    if (cloud.has_colors()) os << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    os << "end_header\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.positions[i];
        os << fmt(p.x()) << ' ' << fmt(p.y()) << ' ' << fmt(p.z());
        if (cloud.has_colors()) {
            for (int c = 0; c < 3; ++c)
                os << ' ' << std::lround(std::clamp(cloud.colors[i][c], 0.0f, 1.0f) * 255.0f);
        }
        os << '\n';
    }
    write_text(os.str(), path);
}

PointCloud load_ply(const std::string& path) {
    std::istringstream in(read_text(path, "PLY file"));
    std::string line;
    if (!std::getline(in, line) || line != "ply") throw Error(ErrorKind::Format, path + ": missing ply magic");
    std::size_t count = 0;
    bool colors = false, ascii = false;
    while (std::getline(in, line) && line != "end_header") {
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "format") {
            std::string kind;
            ls >> kind;
            ascii = kind == "ascii";
        } else if (word == "element") {
            std::string name;
            ls >> name >> count;
            if (name != "vertex") throw Error(ErrorKind::Format, path + ": unsupported element " + name);
        } else if (word == "property") {
            std::string type, name;
            ls >> type >> name;
            if (name == "red") colors = true;
        }
    }
    if (!ascii) throw Error(ErrorKind::Format, path + ": only ASCII PLY is supported");
    PointCloud cloud;
    for (std::size_t i = 0; i < count; ++i) {
        Vec3 p;
        if (!(in >> p.x() >> p.y() >> p.z())) throw Error(ErrorKind::Format, path + ": truncated vertex list");
        cloud.positions.push_back(p);
        if (colors) {
            int r, g, b;
            if (!(in >> r >> g >> b)) throw Error(ErrorKind::Format, path + ": truncated vertex colors");
            cloud.colors.emplace_back(r / 255.0f, g / 255.0f, b / 255.0f);
        }
    }
    return cloud;
}

}  // namespace gave
