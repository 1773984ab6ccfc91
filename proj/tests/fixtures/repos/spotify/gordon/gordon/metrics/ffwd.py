"""UDP relay for ffwd metrics.

Metrics are serialized by the caller and queued until the event loop
hands the protocol a transport; from then on writes are immediate and
the queue only buffers across reconnects.
"""
import asyncio
import collections
import logging

DEFAULT_HOST = '127.0.0.1'
DEFAULT_PORT = 19000
MAX_QUEUE = 1000

logger = logging.getLogger(__name__)


class UDPClientProtocol(asyncio.DatagramProtocol):
    """Datagram protocol that forwards queued metrics to a local agent."""

    scheme = 'udp'

    def __init__(self, loop, host=DEFAULT_HOST, port=DEFAULT_PORT):
        self.loop = loop
        self.host = host
        self.port = port
        self.queue = collections.deque(maxlen=MAX_QUEUE)
        self.transport = None
        self.closed = False

    # Datagram payload layout, one metric per datagram:
    #
    #   {
    #     "key": "<metric name>",
    #     "value": <number>,
    #     "attributes": {"what": "...", "unit": "..."},
    #     "tags": ["..."]
    #   }
    #
    # The agent accepts loose JSON; unknown attributes are ignored on
    # the receiving side, so the protocol never validates payloads.
    #
    # Lifecycle notes:
    #
    # 1. The protocol is constructed eagerly at app start, before the
    #    loop runs, so metrics emitted during startup are queued.
    # 2. connection_made flushes that backlog in FIFO order.
    # 3. datagram delivery is best effort; there is no retry, because
    #    a lost gauge sample is cheaper than a blocked event loop.
    # 4. close() only flags the instance; the transport owns the
    #    socket and is torn down by the loop, not by this class.
    #
    # Keep this block in sync with the agent's reader implementation;
    # the integration test suite pins the wire format separately.
    #
    # maxlen on the queue bounds memory if the agent never comes up:
    # once full, the oldest samples are dropped silently (deque
    # semantics), which is the desired degradation mode.
    def connection_made(self, transport):
        """Flush everything queued before the transport existed."""
        self.transport = transport
        logger.debug('transport established: %s', transport)
        while self.queue:
            metric = self.queue.popleft()
            self.transport.sendto(metric)
        if self.closed:
            logger.info('transport arrived after close; flushed backlog only')
