"""Audio configuration constants"""

# Audio configuration
RATE = 16000  # Hz, mono
FRAME_LENGTH = 64  # samples per codec frame
RETAINED = 16  # low-order DCT coefficients kept per frame
PEAK = 0.9  # tone peak amplitude after normalisation
WAV_DTYPE = "float32"
