"""Policy bridge: inference protocol, loopback HTTP transport, mock policies."""
from .client import (DEFAULT_TIMEOUT_S, MAX_TRANSPORT_ATTEMPTS,
                     PolicyClientError, RemotePolicy)
from .mocks import (ConstantPolicy, EchoPolicy, GTEchoPolicy, GTTable,
                    NoisyGTPolicy, ScriptedPolicy, corruption_draw,
                    create_policy, cyclic_next, policy_names)
from .protocol import (ANSWER_KINDS, ImagePayload, PolicyRequest,
                       PolicyResponse, ProtocolError, decode_image,
                       encode_image_inline, image_from_dict, image_to_dict,
                       request_from_dict, request_to_dict, response_from_dict,
                       response_to_dict)
from .server import PolicyServer

__all__ = [
    "ANSWER_KINDS", "ConstantPolicy", "DEFAULT_TIMEOUT_S", "EchoPolicy",
    "GTEchoPolicy", "GTTable", "ImagePayload", "MAX_TRANSPORT_ATTEMPTS",
    "NoisyGTPolicy", "PolicyClientError", "PolicyRequest", "PolicyResponse",
    "PolicyServer", "ProtocolError", "RemotePolicy", "ScriptedPolicy",
    "corruption_draw", "create_policy", "cyclic_next", "decode_image",
    "encode_image_inline", "image_from_dict", "image_to_dict", "policy_names",
    "request_from_dict", "request_to_dict", "response_from_dict",
    "response_to_dict",
]
