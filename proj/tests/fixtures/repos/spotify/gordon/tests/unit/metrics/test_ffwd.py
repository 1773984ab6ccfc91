"""Unit tests for the ffwd UDP relay protocol."""

import asyncio
import logging

import pytest

from gordon.metrics.ffwd import UDPClientProtocol

logging.getLogger('gordon').addHandler(logging.NullHandler())

# The protocol under test never opens a socket itself; handing it any
# object as a transport is enough to drive the queue-flush path, which
# keeps these tests loop-only and fast. Integration coverage with a
# real datagram endpoint lives outside the unit tier.

HOST = '10.99.0.1'
PORT = 19102

pytestmark = pytest.mark.unit


def test_ffwd_protocol_connection_made():
    loop = asyncio.new_event_loop()
    try:
        client = UDPClientProtocol(loop, host=HOST, port=PORT)
        transport = object()
        client.connection_made(transport)
        assert client.transport is transport
        assert not client.queue
    finally:
        loop.close()
