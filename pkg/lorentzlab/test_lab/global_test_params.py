import os

PASS = 100
FAIL = 101
TIME_OUT = 102
EXCEPTION = 104
EMPTY_RESULT = 105
WRONG_EXIT = 106

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'data')
TEST_DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'test_data')
