"""Regenerate the packaged content databases from the annotated texts below.

Length, token entropy, hashtags and emoticon counts are derived from the text;
polarity and slang fraction are hand annotations.

    python3 scripts/build_content.py
"""

import json
import math
import re
from collections import Counter
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "hybridbots" / "data"

EMOTICON = re.compile(r"(?::-?[)(DP]|;-?\)|<3|\^\^|xD)")
HASHTAG = re.compile(r"#\w+")

# (text, polarity, slang_fraction, media)
HYBRID = [
    ("Montagmorgen, der Kaffee ist alle und die Bahn hat wieder Verspätung. Irgendwie läuft das heute nicht so richtig rund :-(", -0.4, 0.15, False),
    ("Hab gestern endlich den Keller aufgeräumt. Drei Kisten alte Kabel gefunden, keine Ahnung wofür die mal gut waren lol", 0.1, 0.3, False),
    ("Wer kennt ein gutes Rezept für Linsensuppe ohne Speck? Meine Oma hat das immer so easy hinbekommen, ich irgendwie nicht.", 0.0, 0.25, False),
    ("Sonne draußen, Balkon voller Tomaten, Feierabend in Sicht. Manchmal ist das Leben einfach chillig :)", 0.7, 0.3, False),
    ("Warum klingelt der Paketbote eigentlich immer genau dann, wenn man unter der Dusche steht? Ernsthaft, jedes Mal.", -0.2, 0.2, False),
    ("Heute zum ersten Mal seit Wochen wieder joggen gewesen. Beine sind Pudding, aber der Kopf ist frei. Läuft bei mir ;)", 0.5, 0.35, False),
    ("Die neue Staffel ist echt mega, hab alles an einem Abend weggesuchtet. Jetzt wieder ein Jahr warten, nee danke.", 0.3, 0.4, False),
    ("Kleiner Tipp: Zwiebeln vorher kurz ins Gefrierfach legen, dann heult man beim Schneiden nicht so. Funktioniert wirklich.", 0.3, 0.1, False),
    ("Mein Nachbar bohrt seit acht Uhr morgens. Sonntag. Ich sag nix, ich sag einfach gar nix mehr.", -0.5, 0.2, False),
    ("Habt ihr auch das Gefühl, dass der Sommer dieses Jahr irgendwie an uns vorbeigerauscht ist? Schon wieder September.", -0.1, 0.15, False),
    ("Endlich Wochenende! Plan: nichts tun, Pizza bestellen und vielleicht mal die Wäsche zusammenlegen. Vielleicht. :D", 0.6, 0.3, False),
    ("Im Supermarkt stand heute jemand zehn Minuten vor dem Joghurtregal. Ich fühle dich, Bro, die Auswahl ist krass.", 0.2, 0.45, False),
    ("Fahrrad geflickt, ganz ohne Youtube-Tutorial. Okay, mit einem. Aber trotzdem ein bisschen stolz auf mich.", 0.5, 0.25, False),
    ("Der Hund vom Nachbarn hat mich heute im Treppenhaus so angeschaut, als hätte ich ihm persönlich was weggenommen.", 0.1, 0.15, False),
    ("Kennt ihr das, wenn man in die Küche geht und vergessen hat, was man wollte? Passiert mir gefühlt fünfmal am Tag.", 0.0, 0.2, False),
    ("Heute Abend Grillen mit Freunden, das Wetter spielt hoffentlich mit. Wer bringt den Nudelsalat mit? :)", 0.6, 0.2, False),
    ("Die Heizung macht wieder diese komischen Geräusche. Der Vermieter meint, das sei normal. Klar, total normal.", -0.4, 0.3, False),
    ("Neues Buch angefangen und schon um halb zwei nachts noch wach gewesen. Morgen wird hart, aber es war es wert.", 0.4, 0.15, False),
    ("Zugausfall, Schienenersatzverkehr, Anschluss verpasst. Deutsche Bahn, du schaffst es immer wieder, mich zu überraschen.", -0.6, 0.25, False),
    ("Wer hätte gedacht, dass man mit einem alten Einmachglas und etwas Erde so viel Spaß haben kann? Kressezucht läuft!", 0.6, 0.3, False),
    ("Unpopuläre Meinung: Rosinen gehören nicht in den Kartoffelsalat. Niemals. Ich lasse mich da auch nicht umstimmen.", -0.1, 0.35, False),
    ("Heute Mittag in der Kantine gab es Schnitzel, und zwar ein richtig gutes. Der Tag ist gerettet, Leute.", 0.7, 0.3, False),
    ("Die Kinder haben die Wand im Flur bemalt. Künstlerisch wertvoll, sagen sie. Ich sage: Farbe kaufen.", -0.1, 0.2, False),
    ("Gerade gemerkt, dass ich seit drei Tagen die falschen Socken anhabe. Also links und rechts vertauscht. Geht das überhaupt?", 0.1, 0.25, False),
    ("Wenn die Mikrowelle piept und niemand reagiert, ist das dann noch eine Nachricht oder schon ein Hilferuf? xD", 0.3, 0.4, False),
    ("Nach zwei Stunden Telefonwarteschleife endlich jemanden erreicht. Die Antwort: Da müssen Sie eine E-Mail schreiben.", -0.6, 0.2, False),
    ("Spaziergang am Fluss, Enten gefüttert, kurz die Welt vergessen. Mehr braucht es manchmal nicht.", 0.7, 0.1, False),
    ("Auf der Arbeit haben heute alle über das Wetter geredet. Ich glaube, wir brauchen dringend neue Gesprächsthemen lol", 0.1, 0.35, False),
    ("Ich hab beschlossen, ab morgen früher aufzustehen. Mal sehen, wie lange der Vorsatz hält. Wetten werden angenommen.", 0.2, 0.3, False),
    ("Pfannkuchen zum Abendessen ist völlig legitim, ihr könnt mir nichts erzählen. Mit Apfelmus natürlich.", 0.5, 0.25, False),
    ("Die Waschmaschine frisst Socken. Es gibt keine andere Erklärung. Irgendwo muss ein ganzes Paralleluniversum voller Socken sein.", 0.0, 0.2, False),
    ("Endlich mal wieder im Kino gewesen. Popcorn viel zu teuer, Film viel zu lang, trotzdem irgendwie nice.", 0.3, 0.45, False),
    ("Der Kollege hat heute Kuchen mitgebracht, einfach so, ohne Geburtstag. Solche Menschen braucht die Welt <3", 0.8, 0.25, False),
    ("Regen, Regen, Regen. Ich hab vergessen, wie die Sonne aussieht. Falls sie jemand sieht, schöne Grüße.", -0.3, 0.2, False),
    ("Heute gelernt, dass man Bananen nicht in den Kühlschrank legen sollte. Fast dreißig Jahre alt und immer noch was Neues.", 0.2, 0.15, False),
    ("Zwei Stunden Steuererklärung und noch nicht mal die Hälfte geschafft. Wer hat sich dieses Formular ausgedacht?", -0.5, 0.3, False),
    ("Die Katze liegt auf meiner Tastatur und ich bringe es nicht übers Herz, sie zu verscheuchen. Homeoffice halt ^^", 0.5, 0.4, False),
    ("Kleine Erinnerung an alle: Trinkt genug Wasser heute. Ich sag das auch mir selbst, ehrlich gesagt.", 0.4, 0.15, False),
    ("Flohmarkt heute Morgen war der Hammer, drei alte Schallplatten für fünf Euro ergattert. Sammlerherz schlägt höher!", 0.8, 0.35, False),
    ("Warum sind die Zimmerpflanzen bei anderen immer so grün und bei mir so traurig? Ich gieße doch, ehrlich.", -0.2, 0.2, False),
    ("Blick vom Balkon heute Abend. Der Himmel sieht aus wie gemalt :)", 0.8, 0.1, True),
    ("Erster selbstgebackener Sauerteig, nicht perfekt, aber meiner.", 0.6, 0.2, True),
    ("So sieht es aus, wenn die Katze beschließt, dass der Karton jetzt ihr Zuhause ist.", 0.5, 0.25, True),
    ("Herbstlaub im Park, mehr muss man dazu nicht sagen.", 0.6, 0.1, True),
    ("Mein Frühstück heute. Ja, das Ei ist leicht angebrannt, danke der Nachfrage ;)", 0.3, 0.3, True),
    ("Der Stau auf der A3 heute früh. Gruß an alle, die da auch drinstecken.", -0.4, 0.2, True),
]

PUSH = [
    ("Heute Abend wird es bunt, wer macht mit? Gleich geht es los und ihr seid alle eingeladen, einfach mitzumachen!", 0.7, 0.3),
    ("Habt ihr es schon mitbekommen? Das ist gerade das Thema des Abends und ich finde es einfach großartig :D", 0.8, 0.35),
    ("Ich bin dabei und freue mich drauf. Erzählt es weiter, je mehr Leute, desto lustiger wird der ganze Spaß.", 0.7, 0.2),
    ("Kann mir jemand erklären, warum das heute alle teilen? Egal, ich mache einfach mit, klingt nach einer guten Sache.", 0.4, 0.3),
    ("Kleine Aktion, große Wirkung: Heute Abend zeigen wir, was so alles geht. Bin gespannt, wer alles dabei ist ;)", 0.6, 0.25),
    ("Endlich mal was Lustiges in der Timeline statt immer nur Nachrichten. Danke an alle, die heute mitmachen!", 0.7, 0.3),
    ("Sofa, Tee und dieses Thema. Perfekter Abend, wenn ihr mich fragt. Wer ist noch so drauf heute?", 0.6, 0.35),
    ("Ich lach mich schlapp, was hier gerade los ist. So viele gute Beiträge auf einmal, das gab es lange nicht.", 0.8, 0.45),
]

NAIVE = [
    ("Check this out now, best deals today only! Follow for more!", 0.6, 0.0),
    ("Follow me and I follow back. Best content every hour!", 0.5, 0.0),
    ("Big news today, do not miss it. Follow for more!", 0.4, 0.0),
]


def describe(text, polarity, slang, media=False):
    tokens = text.lower().split()
    counts = Counter(tokens)
    n = len(tokens)
    entropy = -sum(c / n * math.log2(c / n) for c in counts.values()) if n else 0.0
    return {
        "length": len(text),
        "token_entropy": round(entropy + 0.0, 4),
        "hashtags": list(dict.fromkeys(HASHTAG.findall(text))),
        "emoticon_count": len(EMOTICON.findall(text)),
        "polarity": polarity,
        "slang_fraction": slang,
        "media": media,
        "text": text,
    }


def write(name, rows):
    with open(OUT / name, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(describe(*row), ensure_ascii=False) + "\n")


if __name__ == "__main__":
    write("content_hybrid.jsonl", HYBRID)
    write("content_push.jsonl", PUSH)
    write("content_naive.jsonl", NAIVE)
