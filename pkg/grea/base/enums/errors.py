# -- 텐서 연산
# 두 텐서의 shape 이 맞지 않음
E001_SHAPE_MISMATCH = {
    "message": "텐서 shape 이 맞지 않습니다",
    "error_code": "E0010001",
}
# 브로드캐스트 불가 (열 벡터 x 행 형태만 허용)
E001_NOT_BROADCASTABLE = {
    "message": "브로드캐스트할 수 없는 shape 입니다",
    "error_code": "E0010002",
}
# segment id 범위 초과
E001_SEGMENT_OUT_OF_RANGE = {
    "message": "segment id 가 범위를 벗어났습니다",
    "error_code": "E0010003",
}
# backward 는 스칼라에서만 가능
E001_NON_SCALAR_ROOT = {
    "message": "backward 는 스칼라 텐서에서만 호출할 수 있습니다",
    "error_code": "E0010004",
}
# zero_grad 없이 backward 재호출
E001_GRAD_NOT_RESET = {
    "message": "grad 를 초기화하지 않고 backward 를 다시 호출했습니다",
    "error_code": "E0010005",
}
# 이진 분류 타깃이 0 또는 1 이 아님
E001_NON_BINARY_TARGET = {
    "message": "이진 분류 타깃은 0 또는 1 이어야 합니다",
    "error_code": "E0010006",
}
# 그래디언트 검사 지점에서 f 가 유한하지 않음
E001_NON_FINITE_POINT = {
    "message": "검사 지점에서 함수값이 유한하지 않습니다",
    "error_code": "E0010007",
}

# -- 그래프 데이터
# JSONL 한 줄의 형식이 올바르지 않음
E002_MALFORMED_LINE = {
    "message": "데이터 파일 형식이 올바르지 않습니다",
    "error_code": "E0020001",
}
# 엣지 끝점이 노드 수를 넘음
E002_EDGE_OUT_OF_RANGE = {
    "message": "엣지 끝점이 노드 범위를 벗어났습니다",
    "error_code": "E0020002",
}
# 노드 feature 행 길이가 제각각임
E002_RAGGED_FEATURES = {
    "message": "노드 feature 길이가 일정하지 않습니다",
    "error_code": "E0020003",
}
# 그래프 불변식 위반 (빈 그래프, self-loop, rationale 범위)
E002_INVALID_GRAPH = {
    "message": "그래프 구조가 올바르지 않습니다",
    "error_code": "E0020004",
}
# 데이터 파일이 없음
E002_FILE_NOT_FOUND = {
    "message": "파일을 찾을 수 없습니다",
    "error_code": "E0020005",
}
# 배치 크기가 올바르지 않음
E002_INVALID_BATCH_SIZE = {
    "message": "배치 크기는 1 이상이어야 합니다",
    "error_code": "E0020006",
}
# split 비율 합이 1 이 아님
E002_INVALID_RATIOS = {
    "message": "split 비율이 올바르지 않습니다",
    "error_code": "E0020007",
}
# 합성 데이터 설정 오류
E002_INVALID_SYNTHETIC_SPEC = {
    "message": "합성 데이터 설정이 올바르지 않습니다",
    "error_code": "E0020008",
}

# -- 설정
# 설정 파일 검증 실패
E003_INVALID_CONFIG = {
    "message": "설정이 올바르지 않습니다",
    "error_code": "E0030001",
}
# 알 수 없는 aggregation
E003_UNKNOWN_AGG = {
    "message": "지원하지 않는 aggregation 입니다",
    "error_code": "E0030002",
}
# predictor 입력 폭과 aggregation 불일치
E003_PREDICTOR_WIDTH = {
    "message": "predictor 입력 폭이 aggregation 과 맞지 않습니다",
    "error_code": "E0030003",
}
# 체크포인트와 데이터 feature 폭 불일치
E003_FEATURE_WIDTH = {
    "message": "체크포인트와 데이터의 feature 폭이 다릅니다",
    "error_code": "E0030004",
}
# 체크포인트 형식 오류
E003_INVALID_CHECKPOINT = {
    "message": "체크포인트 형식이 올바르지 않습니다",
    "error_code": "E0030005",
}
# 과제 종류와 라벨이 맞지 않음
E003_TASK_LABEL_MISMATCH = {
    "message": "과제 종류와 라벨 값이 맞지 않습니다",
    "error_code": "E0030006",
}

# -- 학습
# 손실이 NaN/Inf
E004_NON_FINITE_LOSS = {
    "message": "손실 값이 유한하지 않아 학습을 중단합니다",
    "error_code": "E0040001",
}
# 학습 split 이 비어 있음
E004_EMPTY_TRAIN_SPLIT = {
    "message": "학습 데이터가 비어 있습니다",
    "error_code": "E0040002",
}
# 평가 split 이 비어 있음
E004_EMPTY_EVAL_SPLIT = {
    "message": "평가할 데이터가 비어 있습니다",
    "error_code": "E0040003",
}
# 그래디언트 자체 점검 실패
E004_GRAD_CHECK_FAILED = {
    "message": "그래디언트 점검을 통과하지 못했습니다",
    "error_code": "E0040004",
}

# -- 평가 지표
# 정의되지 않는 지표 (단일 클래스, 상수 타깃)
E005_UNDEFINED_METRIC = {
    "message": "지표를 계산할 수 없습니다",
    "error_code": "E0050001",
}
# 정답 rationale 이 비어 있음
E005_EMPTY_TRUTH = {
    "message": "정답 rationale 이 비어 있습니다",
    "error_code": "E0050002",
}
