# Tests for Agent0 SDK
