"""Minimal H.264 baseline bitstream used as the simulated camera's output.

The camera does not encode real pictures.  It emits a fixed, standards
conforming sequence: one SPS, one PPS, a flat grey IDR picture (every
macroblock I_16x16 with DC prediction and no residual) and then P pictures in
which every macroblock is skipped.  Any H.264 decoder shows a static grey
frame for the whole clip.
"""

from __future__ import annotations

NAL_SLICE = 1
NAL_IDR = 5
NAL_SPS = 7
NAL_PPS = 8

PROFILE_BASELINE = 66
LEVEL_3_1 = 31
LOG2_MAX_FRAME_NUM = 4


class BitWriter:
    def __init__(self):
        self._bits: list[int] = []

    def u(self, nbits: int, value: int) -> None:
        for i in range(nbits - 1, -1, -1):
            self._bits.append((value >> i) & 1)

    def ue(self, value: int) -> None:
        code = value + 1
        n = code.bit_length()
        self.u(n - 1, 0)
        self.u(n, code)

    def se(self, value: int) -> None:
        self.ue(2 * value - 1 if value > 0 else -2 * value)

    def rbsp_trailing(self) -> None:
        self._bits.append(1)
        while len(self._bits) % 8:
            self._bits.append(0)

    def getvalue(self) -> bytes:
        if len(self._bits) % 8:
            raise ValueError("bitstream is not byte aligned")
        out = bytearray()
        for i in range(0, len(self._bits), 8):
            byte = 0
            for b in self._bits[i:i + 8]:
                byte = (byte << 1) | b
            out.append(byte)
        return bytes(out)


def add_emulation_prevention(rbsp: bytes) -> bytes:
    out = bytearray()
    zeros = 0
    for b in rbsp:
        if zeros >= 2 and b <= 3:
            out.append(3)
            zeros = 0
        out.append(b)
        zeros = zeros + 1 if b == 0 else 0
    return bytes(out)


def nal_unit(nal_ref_idc: int, nal_type: int, rbsp: bytes) -> bytes:
    return bytes([(nal_ref_idc << 5) | nal_type]) + add_emulation_prevention(rbsp)


def _mb_dims(width: int, height: int) -> tuple[int, int]:
    if width <= 0 or height <= 0:
        raise ValueError("frame dimensions must be positive")
    if width % 2 or height % 2:
        raise ValueError("4:2:0 frame dimensions must be even")
    return (width + 15) // 16, (height + 15) // 16


def sps(width: int, height: int) -> bytes:
    mbw, mbh = _mb_dims(width, height)
    w = BitWriter()
    w.u(8, PROFILE_BASELINE)
    w.u(8, 0xC0)  # constraint_set0_flag, constraint_set1_flag
    w.u(8, LEVEL_3_1)
    w.ue(0)  # seq_parameter_set_id
    w.ue(LOG2_MAX_FRAME_NUM - 4)
    w.ue(2)  # pic_order_cnt_type: output order = decode order
    w.ue(1)  # max_num_ref_frames
    w.u(1, 0)  # gaps_in_frame_num_value_allowed_flag
    w.ue(mbw - 1)
    w.ue(mbh - 1)
    w.u(1, 1)  # frame_mbs_only_flag
    w.u(1, 1)  # direct_8x8_inference_flag
    crop_right, crop_bottom = (mbw * 16 - width) // 2, (mbh * 16 - height) // 2
    if crop_right or crop_bottom:
        w.u(1, 1)
        w.ue(0)
        w.ue(crop_right)
        w.ue(0)
        w.ue(crop_bottom)
    else:
        w.u(1, 0)
    w.u(1, 0)  # vui_parameters_present_flag
    w.rbsp_trailing()
    return nal_unit(3, NAL_SPS, w.getvalue())


def pps() -> bytes:
    w = BitWriter()
    w.ue(0)  # pic_parameter_set_id
    w.ue(0)  # seq_parameter_set_id
    w.u(1, 0)  # entropy_coding_mode_flag (CAVLC)
    w.u(1, 0)  # bottom_field_pic_order_in_frame_present_flag
    w.ue(0)  # num_slice_groups_minus1
    w.ue(0)  # num_ref_idx_l0_default_active_minus1
    w.ue(0)  # num_ref_idx_l1_default_active_minus1
    w.u(1, 0)  # weighted_pred_flag
    w.u(2, 0)  # weighted_bipred_idc
    w.se(0)  # pic_init_qp_minus26
    w.se(0)  # pic_init_qs_minus26
    w.se(0)  # chroma_qp_index_offset
    w.u(1, 1)  # deblocking_filter_control_present_flag
    w.u(1, 0)  # constrained_intra_pred_flag
    w.u(1, 0)  # redundant_pic_cnt_present_flag
    w.rbsp_trailing()
    return nal_unit(3, NAL_PPS, w.getvalue())


def idr_slice(width: int, height: int, idr_pic_id: int = 0) -> bytes:
    mbw, mbh = _mb_dims(width, height)
    w = BitWriter()
    w.ue(0)  # first_mb_in_slice
    w.ue(7)  # slice_type: I, all slices of the picture
    w.ue(0)  # pic_parameter_set_id
    w.u(LOG2_MAX_FRAME_NUM, 0)  # frame_num
    w.ue(idr_pic_id)
    w.u(1, 0)  # no_output_of_prior_pics_flag
    w.u(1, 0)  # long_term_reference_flag
    w.se(0)  # slice_qp_delta
    w.ue(1)  # disable_deblocking_filter_idc
    for _ in range(mbw * mbh):
        w.ue(3)  # mb_type I_16x16_2_0_0: DC prediction, no coded residual
        w.ue(0)  # intra_chroma_pred_mode: DC
        w.se(0)  # mb_qp_delta
        w.u(1, 1)  # Intra16x16DCLevel coeff_token: TotalCoeff 0 (nC < 2)
    w.rbsp_trailing()
    return nal_unit(3, NAL_IDR, w.getvalue())


def skip_slice(width: int, height: int, frame_num: int) -> bytes:
    mbw, mbh = _mb_dims(width, height)
    w = BitWriter()
    w.ue(0)  # first_mb_in_slice
    w.ue(5)  # slice_type: P, all slices of the picture
    w.ue(0)  # pic_parameter_set_id
    w.u(LOG2_MAX_FRAME_NUM, frame_num % (1 << LOG2_MAX_FRAME_NUM))
    w.u(1, 0)  # num_ref_idx_active_override_flag
    w.u(1, 0)  # ref_pic_list_modification_flag_l0
    w.u(1, 0)  # adaptive_ref_pic_marking_mode_flag
    w.se(0)  # slice_qp_delta
    w.ue(1)  # disable_deblocking_filter_idc
    w.ue(mbw * mbh)  # mb_skip_run covering the whole picture
    w.rbsp_trailing()
    return nal_unit(2, NAL_SLICE, w.getvalue())


def clip_nals(width: int, height: int, n_frames: int, gop: int = 30) -> list[bytes]:
    """Parameter sets followed by ``n_frames`` picture NAL units.

    An IDR picture starts every group of ``gop`` frames.
    """
    if n_frames < 1:
        raise ValueError("a clip needs at least one frame")
    nals = [sps(width, height), pps()]
    idr = 0
    for i in range(n_frames):
        k = i % gop
        if k == 0:
            nals.append(idr_slice(width, height, idr % 2))
            idr += 1
        else:
            nals.append(skip_slice(width, height, k))
    return nals


def strip_emulation_prevention(payload: bytes) -> bytes:
    out = bytearray()
    zeros = 0
    for b in payload:
        if zeros >= 2 and b == 3:
            zeros = 0
            continue
        out.append(b)
        zeros = zeros + 1 if b == 0 else 0
    return bytes(out)


class BitReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def u(self, nbits: int) -> int:
        v = 0
        for _ in range(nbits):
            byte = self.data[self.pos >> 3] if (self.pos >> 3) < len(self.data) else None
            if byte is None:
                raise ValueError("read past end of RBSP")
            v = (v << 1) | ((byte >> (7 - (self.pos & 7))) & 1)
            self.pos += 1
        return v

    def ue(self) -> int:
        zeros = 0
        while self.u(1) == 0:
            zeros += 1
            if zeros > 31:
                raise ValueError("invalid Exp-Golomb code")
        return (1 << zeros) - 1 + self.u(zeros)

    def se(self) -> int:
        k = self.ue()
        return (k + 1) // 2 if k % 2 else -(k // 2)


_HIGH_PROFILES = {100, 110, 122, 244, 44, 83, 86, 118, 128, 138, 139, 134, 135}


def sps_dimensions(payload: bytes) -> tuple[int, int]:
    """Cropped luma width and height coded in an SPS NAL unit."""
    r = BitReader(strip_emulation_prevention(payload[1:]))
    profile = r.u(8)
    r.u(16)  # constraint flags, level_idc
    r.ue()
    chroma_format_idc = 1
    if profile in _HIGH_PROFILES:
        chroma_format_idc = r.ue()
        if chroma_format_idc == 3:
            r.u(1)
        r.ue()
        r.ue()
        r.u(1)
        if r.u(1):
            raise ValueError("SPS scaling matrices are not supported")
    r.ue()  # log2_max_frame_num_minus4
    poc_type = r.ue()
    if poc_type == 0:
        r.ue()
    elif poc_type == 1:
        r.u(1)
        r.se()
        r.se()
        for _ in range(r.ue()):
            r.se()
    r.ue()
    r.u(1)
    mbw = r.ue() + 1
    map_h = r.ue() + 1
    frame_mbs_only = r.u(1)
    if not frame_mbs_only:
        r.u(1)
    r.u(1)
    width, height = mbw * 16, map_h * 16 * (2 - frame_mbs_only)
    if r.u(1):
        left, right, top, bottom = r.ue(), r.ue(), r.ue(), r.ue()
        cx = 1 if chroma_format_idc in (0, 3) else 2
        cy = (2 if chroma_format_idc == 1 else 1) * (2 - frame_mbs_only)
        if chroma_format_idc == 0:
            cy = 2 - frame_mbs_only
        width -= cx * (left + right)
        height -= cy * (top + bottom)
    return width, height
