import hashlib
import io
import json
import zipfile

import pytest

import logomon


@pytest.fixture
def store(tmp_path):
    return logomon.Store(tmp_path / "data")


def add_word(store, tmp_path, text, **fields):
    (tmp_path / f"{text}.wav").write_bytes(b"RIFF" + text.encode())
    (tmp_path / f"{text}.png").write_bytes(b"PNG" + text.encode())
    sound = store.register_media_asset("Sound", tmp_path / f"{text}.wav")
    image = store.register_media_asset("Image", tmp_path / f"{text}.png")
    word = {
        "text": text,
        "speakerFamilyName": "Pop",
        "speakerGivenName": "Ana",
        "isTherapistRecording": True,
        "partOfSpeech": "Noun",
        "partOfSpeechLabel": "",
        "gender": "Masculine",
        "articleCompatible": True,
        "soundAssetId": sound["id"],
        "imageAssetId": image["id"],
    }
    word.update(fields)
    word["id"] = store.put("Word", word)
    return word


@pytest.fixture
def assignment(store, tmp_path):
    copil = add_word(store, tmp_path, "copil")
    add_word(store, tmp_path, "copii", articleCompatible=False)
    type_id = store.put("ExerciseType", {"name": "Auz", "applicationName": "Auz.exe"})
    subtype_id = store.put("ExerciseSubtype", {"name": "Paronime", "applicationName": ""})
    sound_id = store.put("TargetSound", {"label": "ș"})
    assoc = store.put("Association", {"typeId": type_id, "subtypeId": subtype_id, "soundId": sound_id})
    instr = store.put("Instructions", {"text": "Ascultă și alege."})
    ex = store.put("Exercise", {"title": "Ascultare", "difficulty": 2, "associationId": assoc, "instructionsId": instr})
    store.put("ExerciseConfiguration", {"exerciseId": ex, "wordId": copil["id"], "paronymId": None,
                                        "param1": 1500, "param2": 0, "param3": 0})
    tmpl = store.put("PredefinedHomework", {
        "description": "Temă", "repetitionsPerDay": 2,
        "exerciseItems": [{"exerciseId": ex, "successThresholdPercent": 80}],
        "deficiencyRefs": [], "testRefs": [],
    })
    child = store.put("Child", {"familyName": "Ionescu", "givenName": "Maria"})
    return logomon.assign_homework(store, child, tmpl, "2024-03-01", 7)


def test_round_trip_keeps_diacritics(store, assignment):
    assert store.get("TargetSound", 1)["label"] == "ș"
    assert store.get("Instructions", 1)["text"].encode() == "Ascultă și alege.".encode()
    assert store.audit() == []


def test_article_rule(store, tmp_path):
    copil = add_word(store, tmp_path, "copil")
    copii = add_word(store, tmp_path, "copii", articleCompatible=False)
    assert logomon.indefinite_article_for(copil) == "un"
    assert logomon.indefinite_article_for(copii) is None


def test_errors_carry_codes(store, assignment):
    with pytest.raises(logomon.LogomonError) as exc:
        store.get("Word", 999)
    assert exc.value.code == "NotFound"
    with pytest.raises(logomon.LogomonError) as exc:
        store.put("Exercise", {"title": "x", "difficulty": 6, "associationId": 1, "instructionsId": 1})
    assert exc.value.code == "ValidationFailed"
    with pytest.raises(logomon.LogomonError) as exc:
        store.erase("Word", 1)
    assert exc.value.code == "StillReferenced"


def test_status_and_report(store, assignment):
    assert logomon.assignment_status(store, assignment["id"], "2024-03-08")["status"] == "Pending"
    outcomes = logomon.ingest_report(store, {
        "assignmentId": assignment["id"], "reportDate": "2024-03-08",
        "records": [{"exerciseId": 1, "attemptIndex": 1, "achievedPercent": 70, "initiallyWrongWords": 1},
                    {"exerciseId": 1, "attemptIndex": 2, "achievedPercent": 85, "initiallyWrongWords": 0}],
    })
    assert outcomes[0]["resolved"] is True
    assert logomon.assignment_status(store, assignment["id"], "2024-04-01")["status"] == "ReportedOnTime"
    progress = logomon.child_progress(store, 1)
    assert progress["perAssignment"][0]["meanBestPercent"]["numerator"] == 85


def test_bundle_digests_match_independent_hashing(store, assignment):
    archive, digest = logomon.build_bundle(store, assignment["id"], "2024-03-01T10:00:00Z")
    with zipfile.ZipFile(io.BytesIO(archive)) as zf:
        names = zf.namelist()
        assert names == sorted(names)
        manifest_bytes = zf.read("manifest.json")
        assert hashlib.sha256(manifest_bytes).hexdigest() == digest
        manifest = json.loads(manifest_bytes)
        for asset in manifest["assets"]:
            assert hashlib.sha256(zf.read(asset["relativePath"])).hexdigest() == asset["digest"]
        assert all(info.date_time == (1980, 1, 1, 0, 0, 0) for info in zf.infolist())
    assert manifest["exercises"][0]["configuration"][0]["articleToken"] == "un"
    again, _ = logomon.build_bundle(store, assignment["id"], "2024-03-01T10:00:00Z")
    assert again == archive

    results = logomon.simulate_device(archive, 0.0, 3)
    assert logomon.read_result_archive(results)["manifestDigest"] == digest
    outcomes = logomon.import_result_archive(store, results)
    assert all(o["resolved"] for o in outcomes)
    with pytest.raises(logomon.LogomonError) as exc:
        logomon.import_result_archive(store, results)
    assert exc.value.code == "AlreadyReported"


def test_cli_in_process(tmp_path):
    code, out, _ = logomon.cli("--data-root", tmp_path / "d", "child", "add", "--family", "Pop", "--given", "Ion")
    assert (code, out) == (0, "1\n")
    code, _, err = logomon.cli("--data-root", tmp_path / "d", "assign", "status", "--id", "5")
    assert code == 1 and "NotFound" in err
    assert logomon.cli("nonsense")[0] == 2
