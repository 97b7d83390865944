"""VoIP media pipeline toolkit: G.711 codec, RTP-style packets, UDP and
simulated-channel transport, jitter buffer, spectral analysis and QoS."""

from .audio_io import AudioSignal, apply_gain, generate_tone, read_wav, write_wav
from .codec import (CompandingLaw, EncodedPayload, alaw_decode, alaw_encode, decode_frame,
                    encode_frame, mulaw_decode, mulaw_encode)
from .dsp import (SpectralResult, Spectrogram, Window, packed_spectrum, periodogram, spectrogram,
                  spectrum, welch_psd)
from .jitter_buffer import Concealment, JitterBuffer, PlayoutConfig, PlayoutFrame
from .packetizer import (FrameConfig, PacketHeader, VoipPacket, depacketize, packetize,
                         parse_packet, serialize_packet)
from .qos import (QosReport, delay_stats, interarrival_jitter, loss_rate,
                  reconstruction_snr)
from .transport import (ChannelConfig, DeliveredPacket, SimulatedChannel, recv_udp, send_udp,
                        simulate_channel)

__version__ = "0.1.0"
