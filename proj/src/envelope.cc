#include "mmsguard/envelope.h"
#include "mmsguard/ber.h"
#include "mmsguard/error.h"

#include <algorithm>

namespace mmsguard {

namespace {

constexpr std::uint8_t kTpktVersion = 0x03;
constexpr std::size_t kTpktHeader = 4;
constexpr std::uint8_t kCotpDt = 0xf0;
constexpr std::uint8_t kCotpCr = 0xe0;
constexpr std::uint8_t kCotpCc = 0xd0;
constexpr std::uint8_t kSpduConnect = 0x0d;
constexpr std::uint8_t kSpduAccept = 0x0e;
constexpr std::uint8_t kFullyEncodedData = 0x61;

// Fully-encoded-data -> PDV-list -> single-ASN1-type [0].
std::optional<Bytes> pdv_user_data(ByteView bytes, std::size_t pos)
{
    auto fed = ber::try_decode_tlv(bytes, pos);
    if (!fed || fed->tag != kFullyEncodedData)
        return std::nullopt;
    auto pdv = ber::try_decode_tlv(bytes.first(fed->content_end), fed->content_begin);
    if (!pdv || pdv->tag != 0x30)
        return std::nullopt;
    for (std::size_t p = pdv->content_begin; p < pdv->content_end;) {
        auto t = ber::try_decode_tlv(bytes.first(pdv->content_end), p);
        if (!t)
            return std::nullopt;
        if (t->tag == 0xa0) {
            auto c = ber::content_of(bytes, *t);
            return Bytes(c.begin(), c.end());
        }
        p = t->next;
    }
    return std::nullopt;
}

// ACSE user-information [30] -> EXTERNAL -> single-ASN1-type [0].
std::optional<Bytes> acse_user_data(ByteView bytes)
{
    for (std::size_t pos = 0; pos + 2 <= bytes.size(); ++pos) {
        if (bytes[pos] != 0xbe)
            continue;
        auto ui = ber::try_decode_tlv(bytes, pos);
        if (!ui)
            continue;
        auto ext = ber::try_decode_tlv(bytes.first(ui->content_end), ui->content_begin);
        if (!ext || ext->tag != 0x28)
            continue;
        for (std::size_t p = ext->content_begin; p < ext->content_end;) {
            auto t = ber::try_decode_tlv(bytes.first(ext->content_end), p);
            if (!t)
                break;
            if (t->tag == 0xa0) {
                auto c = ber::content_of(bytes, *t);
                return Bytes(c.begin(), c.end());
            }
            p = t->next;
        }
    }
    return std::nullopt;
}

Bytes tpkt(ByteView cotp_and_data)
{
    if (cotp_and_data.size() > 0xffff - kTpktHeader)
        throw Unencodable("payload does not fit one TPKT");
    Bytes out{kTpktVersion, 0x00};
    put_be16(out, std::uint16_t(kTpktHeader + cotp_and_data.size()));
    out.insert(out.end(), cotp_and_data.begin(), cotp_and_data.end());
    return out;
}

Bytes wrap_connect(std::uint8_t spdu, std::uint8_t cp_tag, std::uint8_t acse_tag, ByteView initiate)
{
    // EXTERNAL { direct-reference? no; indirect-reference 3, single-ASN1-type }
    Bytes ext_content;
    const std::uint8_t ctx = 0x03;
    ber::put_tlv(ext_content, 0x02, ByteView(&ctx, 1));
    ber::put_tlv(ext_content, 0xa0, initiate);
    Bytes ext;
    ber::put_tlv(ext, 0x28, ext_content);
    Bytes user_info;
    ber::put_tlv(user_info, 0xbe, ext);

    // application-context-name 1.0.9506.2.3 (MMS)
    Bytes acse_content{0xa1, 0x07, 0x06, 0x05, 0x28, 0xca, 0x22, 0x02, 0x03};
    acse_content.insert(acse_content.end(), user_info.begin(), user_info.end());
    Bytes acse;
    ber::put_tlv(acse, acse_tag, acse_content);

    Bytes pdv_content{0x02, 0x01, 0x01};
    ber::put_tlv(pdv_content, 0xa0, acse);
    Bytes pdv;
    ber::put_tlv(pdv, 0x30, pdv_content);
    Bytes fed;
    ber::put_tlv(fed, kFullyEncodedData, pdv);

    Bytes normal_mode{0x81, 0x04, 0x00, 0x00, 0x00, 0x01, 0x82, 0x04, 0x00, 0x00, 0x00, 0x01};
    normal_mode.insert(normal_mode.end(), fed.begin(), fed.end());
    Bytes cp_content{0xa0, 0x03, 0x80, 0x01, 0x01};
    ber::put_tlv(cp_content, 0xa2, normal_mode);
    Bytes cp;
    ber::put_tlv(cp, cp_tag, cp_content);

    // Session parameters: protocol options, version 2, user data (0xc1).
    Bytes session_params{0x05, 0x06, 0x13, 0x01, 0x00, 0x16, 0x01, 0x02};
    session_params.push_back(0xc1);
    if (cp.size() > 0xfe) {
        session_params.push_back(0xff);
        put_be16(session_params, std::uint16_t(cp.size()));
    } else {
        session_params.push_back(std::uint8_t(cp.size()));
    }
    session_params.insert(session_params.end(), cp.begin(), cp.end());

    Bytes spdu_bytes{spdu};
    if (session_params.size() > 0xfe) {
        spdu_bytes.push_back(0xff);
        put_be16(spdu_bytes, std::uint16_t(session_params.size()));
    } else {
        spdu_bytes.push_back(std::uint8_t(session_params.size()));
    }
    spdu_bytes.insert(spdu_bytes.end(), session_params.begin(), session_params.end());

    Bytes cotp{0x02, kCotpDt, 0x80};
    cotp.insert(cotp.end(), spdu_bytes.begin(), spdu_bytes.end());
    return tpkt(cotp);
}

} // namespace

std::optional<Bytes> locate_mms_pdu(ByteView s)
{
    if (s.empty())
        return std::nullopt;
    if (s.size() >= 5 && s[0] == 0x01 && s[1] == 0x00 && s[2] == 0x01 && s[3] == 0x00)
        return pdv_user_data(s, 4);
    if (s[0] == kSpduConnect || s[0] == kSpduAccept)
        return acse_user_data(s);
    for (std::size_t pos = 0; pos < s.size(); ++pos) {
        if (s[pos] != kFullyEncodedData)
            continue;
        if (auto pdu = pdv_user_data(s, pos))
            return pdu;
    }
    return std::nullopt;
}

void EnvelopeDecoder::feed(ByteView data, Timestamp ts, std::size_t frame_index)
{
    buf_.insert(buf_.end(), data.begin(), data.end());
    std::size_t pos = 0;
    while (buf_.size() - pos >= 2) {
        if (buf_[pos] != kTpktVersion || buf_[pos + 1] != 0x00) {
            if (!in_desync_) {
                ++stats_.resyncs;
                in_desync_ = true;
            }
            ++pos;
            continue;
        }
        if (buf_.size() - pos < kTpktHeader)
            break;
        std::size_t len = load_be16(&buf_[pos + 2]);
        if (len < kTpktHeader) {
            if (!in_desync_) {
                ++stats_.resyncs;
                in_desync_ = true;
            }
            ++pos;
            continue;
        }
        if (buf_.size() - pos < len)
            break;
        in_desync_ = false;
        process_tpkt(ByteView(buf_.data() + pos, len), ts, frame_index);
        pos += len;
    }
    buf_.erase(buf_.begin(), buf_.begin() + std::ptrdiff_t(pos));
}

void EnvelopeDecoder::process_tpkt(ByteView tpkt_bytes, Timestamp ts, std::size_t frame_index)
{
    ++stats_.tpkts;
    ByteView body = tpkt_bytes.subspan(kTpktHeader);
    if (body.empty())
        return;
    std::size_t li = body[0];
    if (li == 0 || li + 1 > body.size()) {
        ++stats_.not_mms;
        return;
    }
    std::uint8_t type = body[1] & 0xf0;
    if (type != kCotpDt) {
        ++stats_.not_mms;
        return;
    }
    bool eot = li >= 2 && (body[2] & 0x80);
    ByteView user = body.subspan(li + 1);
    cotp_accum_.insert(cotp_accum_.end(), user.begin(), user.end());
    if (!eot) {
        ++stats_.cotp_segments;
        return;
    }
    Bytes session = std::move(cotp_accum_);
    cotp_accum_.clear();
    auto pdu = locate_mms_pdu(session);
    if (!pdu) {
        ++stats_.not_mms;
        return;
    }
    out_.push_back(MmsPdu{ts, frame_index, std::move(*pdu)});
}

std::vector<MmsPdu> EnvelopeDecoder::take()
{
    return std::exchange(out_, {});
}

std::vector<MmsPdu> decode_envelope(ByteView stream, Timestamp ts, EnvelopeStats* stats)
{
    EnvelopeDecoder dec;
    dec.feed(stream, ts);
    if (stats)
        *stats = dec.stats();
    return dec.take();
}

Bytes wrap_data_pdu(ByteView mms_pdu)
{
    Bytes pdv_content{0x02, 0x01, 0x03};
    ber::put_tlv(pdv_content, 0xa0, mms_pdu);
    Bytes pdv;
    ber::put_tlv(pdv, 0x30, pdv_content);

    Bytes cotp{0x02, kCotpDt, 0x80, 0x01, 0x00, 0x01, 0x00};
    ber::put_tlv(cotp, kFullyEncodedData, pdv);
    return tpkt(cotp);
}

Bytes wrap_connect_request(ByteView initiate_request)
{
    return wrap_connect(kSpduConnect, 0x31, 0x60, initiate_request);
}

Bytes wrap_connect_response(ByteView initiate_response)
{
    return wrap_connect(kSpduAccept, 0x31, 0x61, initiate_response);
}

Bytes cotp_connection_request()
{
    // CR with calling/called TSAP 0x0001 and TPDU size 1024
    const Bytes cotp{0x11, kCotpCr, 0x00, 0x00, 0x00, 0x01, 0x00, 0xc0, 0x01, 0x0a,
                     0xc1, 0x02, 0x00, 0x01, 0xc2, 0x02, 0x00, 0x01};
    return tpkt(cotp);
}

Bytes cotp_connection_confirm()
{
    const Bytes cotp{0x11, kCotpCc, 0x00, 0x01, 0x00, 0x01, 0x00, 0xc0, 0x01, 0x0a,
                     0xc1, 0x02, 0x00, 0x01, 0xc2, 0x02, 0x00, 0x01};
    return tpkt(cotp);
}

} // namespace mmsguard
