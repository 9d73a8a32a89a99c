#include "hirise/ppm.hpp"

#include <cctype>
#include <fstream>
#include <string>

namespace hirise {

namespace {

// Header fields are separated by whitespace; '#' starts a comment that runs
// to end of line.
int next_header_int(std::istream& in, const char* what) {
    for (;;) {
        const int c = in.peek();
        if (c == EOF) throw ParseError(std::string("ppm: truncated header before ") + what);
        if (c == '#') {
            std::string comment;
            std::getline(in, comment);
            continue;
        }
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        break;
    }
    int value = 0;
    if (!(in >> value)) throw ParseError(std::string("ppm: expected integer ") + what);
    return value;
}

}  // namespace

PixelArray load_ppm(const std::filesystem::path& path, double vdd) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open image " + path.string());
    }
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '6') {
        throw ParseError("ppm: only binary P6 images are supported");
    }
    const int width = next_header_int(in, "width");
    const int height = next_header_int(in, "height");
    const int maxval = next_header_int(in, "maxval");
    if (width < 1 || height < 1) {
        throw ParseError("ppm: non-positive dimensions");
    }
    if (maxval != 255) {
        throw ParseError("ppm: maxval must be 255, got " + std::to_string(maxval));
    }
    in.get();   // single whitespace byte after the header

    const std::size_t count =
        static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
    std::vector<unsigned char> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) {
        throw ParseError("ppm: truncated pixel data");
    }

    PixelArray img(width, height);
    for (std::size_t i = 0; i < count; ++i) {
        img.data[i] = static_cast<double>(raw[i]) / 255.0 * vdd;
    }
    return img;
}

}  // namespace hirise
