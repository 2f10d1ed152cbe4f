#include "pkgrid/triangle_mesh.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pkgrid
{
namespace
{
static_assert(std::endian::native == std::endian::little, "STL I/O assumes a little-endian host");

constexpr std::size_t kHeaderBytes = 80;
constexpr std::size_t kRecordBytes = 50;

std::uint32_t readU32(const char *p)
{
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
}

float readF32(const char *p)
{
    float v;
    std::memcpy(&v, p, 4);
    return v;
}

std::string lowercase(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c)
                   { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool startsWithSolid(std::string_view bytes)
{
    std::size_t i = 0;
    while (i < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[i])))
        ++i;
    return lowercase(bytes.substr(i, 5)) == "solid";
}

bool isConsistentBinary(std::string_view bytes)
{
    if (bytes.size() < kHeaderBytes + 4)
        return false;
    const std::uint64_t count = readU32(bytes.data() + kHeaderBytes);
    return bytes.size() == kHeaderBytes + 4 + count * kRecordBytes;
}

std::vector<RawTriangle> parseBinary(std::string_view bytes)
{
    if (bytes.size() < kHeaderBytes + 4)
        throw StlParseError("binary STL shorter than its 84-byte header");
    const std::uint64_t count = readU32(bytes.data() + kHeaderBytes);
    const std::uint64_t expected = kHeaderBytes + 4 + count * kRecordBytes;
    if (bytes.size() < expected)
        throw StlParseError("binary STL truncated: header announces " + std::to_string(count) + " triangles");
    std::vector<RawTriangle> triangles(count);
    const char *record = bytes.data() + kHeaderBytes + 4;
    for (std::uint64_t t = 0; t < count; ++t, record += kRecordBytes)
    {
        // 12 bytes of facet normal are ignored; normals are recomputed from winding.
        for (int v = 0; v < 3; ++v)
            for (int k = 0; k < 3; ++k)
                triangles[t].corners[v][k] = readF32(record + 12 + 12 * v + 4 * k);
    }
    return triangles;
}

class AsciiTokens
{
  public:
    explicit AsciiTokens(std::string_view text) : text_(text) {}

    bool next(std::string_view &token)
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if (pos_ >= text_.size())
            return false;
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        token = text_.substr(start, pos_ - start);
        return true;
    }
    void skipLine()
    {
        while (pos_ < text_.size() && text_[pos_] != '\n')
            ++pos_;
    }
    std::string_view expectAny()
    {
        std::string_view token;
        if (!next(token))
            throw StlParseError("ASCII STL ended unexpectedly");
        return token;
    }
    void expect(const char *keyword)
    {
        const std::string_view token = expectAny();
        if (lowercase(token) != keyword)
            throw StlParseError("ASCII STL: expected '" + std::string(keyword) + "', found '" + std::string(token) + "'");
    }
    double number()
    {
        const std::string_view token = expectAny();
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || ptr != token.data() + token.size())
            throw StlParseError("ASCII STL: malformed number '" + std::string(token) + "'");
        return value;
    }

  private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

std::vector<RawTriangle> parseAscii(std::string_view bytes)
{
    AsciiTokens tokens(bytes);
    tokens.expect("solid");
    tokens.skipLine(); // solid name is free text
    std::vector<RawTriangle> triangles;
    while (true)
    {
        const std::string keyword = lowercase(tokens.expectAny());
        if (keyword == "endsolid")
            break;
        if (keyword != "facet")
            throw StlParseError("ASCII STL: expected 'facet' or 'endsolid', found '" + keyword + "'");
        tokens.expect("normal");
        for (int k = 0; k < 3; ++k)
            tokens.number();
        tokens.expect("outer");
        tokens.expect("loop");
        RawTriangle triangle;
        for (int v = 0; v < 3; ++v)
        {
            tokens.expect("vertex");
            for (int k = 0; k < 3; ++k)
                triangle.corners[v][k] = tokens.number();
        }
        tokens.expect("endloop");
        tokens.expect("endfacet");
        triangles.push_back(triangle);
    }
    return triangles;
}

void appendU32(std::string &out, std::uint32_t v)
{
    char buffer[4];
    std::memcpy(buffer, &v, 4);
    out.append(buffer, 4);
}

void appendF32(std::string &out, float v)
{
    char buffer[4];
    std::memcpy(buffer, &v, 4);
    out.append(buffer, 4);
}

Vec3 facetNormal(const RawTriangle &t)
{
    const Vec3 n = (t.corners[1] - t.corners[0]).cross(t.corners[2] - t.corners[0]);
    const Real norm = n.norm();
    return norm > 0.0 ? Vec3(n / norm) : Vec3::Zero();
}
} // namespace

std::vector<RawTriangle> parseStl(std::string_view bytes)
{
    if (startsWithSolid(bytes) && !isConsistentBinary(bytes))
        return parseAscii(bytes);
    return parseBinary(bytes);
}

std::string writeStlBinary(const std::vector<RawTriangle> &triangles)
{
    std::string out(kHeaderBytes, '\0');
    const char header[] = "pkgrid binary STL";
    std::memcpy(out.data(), header, sizeof(header) - 1);
    appendU32(out, static_cast<std::uint32_t>(triangles.size()));
    for (const RawTriangle &t : triangles)
    {
        const Vec3 n = facetNormal(t);
        for (int k = 0; k < 3; ++k)
            appendF32(out, static_cast<float>(n[k]));
        for (const Vec3 &corner : t.corners)
            for (int k = 0; k < 3; ++k)
                appendF32(out, static_cast<float>(corner[k]));
        out.append(2, '\0');
    }
    return out;
}

std::string writeStlAscii(const std::vector<RawTriangle> &triangles, const std::string &solid_name)
{
    std::ostringstream os;
    os.precision(17);
    os << "solid " << solid_name << "\n";
    for (const RawTriangle &t : triangles)
    {
        const Vec3 n = facetNormal(t);
        os << "  facet normal " << n[0] << ' ' << n[1] << ' ' << n[2] << "\n    outer loop\n";
        for (const Vec3 &corner : t.corners)
            os << "      vertex " << corner[0] << ' ' << corner[1] << ' ' << corner[2] << "\n";
        os << "    endloop\n  endfacet\n";
    }
    os << "endsolid " << solid_name << "\n";
    return os.str();
}

TriangleMesh TriangleMesh::loadStlFile(const std::string &path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw std::runtime_error("cannot open STL file '" + path + "'");
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return loadStl(buffer.str());
}
} // namespace pkgrid
