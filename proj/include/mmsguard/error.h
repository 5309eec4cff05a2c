#ifndef MMSGUARD_ERROR_H
#define MMSGUARD_ERROR_H

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mmsguard {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedFormat : public Error
{
public:
    using Error::Error;
};

class TruncatedFile : public Error
{
public:
    TruncatedFile(const std::string& what, std::size_t frames_read)
        : Error(what), frames_read_(frames_read) {}
    std::size_t frames_read() const { return frames_read_; }

private:
    std::size_t frames_read_;
};

class IoFailure : public Error
{
public:
    using Error::Error;
};

// BER structure violation. offset is relative to the buffer handed to the
// decoder; path names the enclosing MMS element when known.
class MalformedTlv : public Error
{
public:
    MalformedTlv(std::size_t offset, std::string reason, std::string path = {});
    std::size_t offset() const { return offset_; }
    const std::string& path() const { return path_; }
    const std::string& reason() const { return reason_; }

private:
    std::size_t offset_;
    std::string reason_;
    std::string path_;
};

class Unencodable : public Error
{
public:
    using Error::Error;
};

class EmptyBenign : public Error
{
public:
    using Error::Error;
};

class SchemaMismatch : public Error
{
public:
    using Error::Error;
};

class DuplicateSignatureId : public Error
{
public:
    using Error::Error;
};

class ParseError : public Error
{
public:
    ParseError(std::size_t line, std::size_t column, std::size_t token, const std::string& reason);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    // 1-based index of the offending token within its line
    std::size_t token() const { return token_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::size_t token_;
};

class InvalidConfig : public Error
{
public:
    InvalidConfig(std::string field, const std::string& reason)
        : Error(field + ": " + reason), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

class UnknownPreset : public Error
{
public:
    using Error::Error;
};

} // namespace mmsguard

#endif
