# Generated by Django 5.2.6 on 2026-10-18 09:12

import django.db.models.deletion
import django.utils.timezone
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('kind', models.CharField(choices=[('play', 'Single game'), ('tournament', 'Round robin'), ('sweep', 'Accuracy sweep'), ('tune', 'NTBEA tuning')], max_length=10)),
                ('seed', models.CharField(max_length=20)),
                ('config', models.JSONField(default=dict, help_text='Resolved experiment config')),
                ('output_dir', models.CharField(blank=True, max_length=500)),
                ('status', models.CharField(choices=[('running', 'Running'), ('complete', 'Complete'), ('interrupted', 'Interrupted'), ('failed', 'Failed')], default='running', max_length=12)),
                ('started_at', models.DateTimeField(default=django.utils.timezone.now)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
                ('summary', models.JSONField(blank=True, default=dict)),
            ],
            options={
                'ordering': ['-started_at'],
            },
        ),
        migrations.CreateModel(
            name='GameResult',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('map_id', models.IntegerField()),
                ('seed', models.CharField(max_length=20)),
                ('blue_agent', models.CharField(max_length=100)),
                ('red_agent', models.CharField(max_length=100)),
                ('winner', models.CharField(choices=[('Blue', 'Blue'), ('Red', 'Red'), ('Draw', 'Draw')], max_length=4)),
                ('score_blue', models.FloatField(help_text='Material advantage of Blue at the end')),
                ('ticks', models.IntegerField()),
                ('decisions_blue', models.IntegerField(default=0)),
                ('decisions_red', models.IntegerField(default=0)),
                ('decision_ms_blue', models.FloatField(default=0.0, help_text='Mean wall time per Blue decision')),
                ('decision_ms_red', models.FloatField(default=0.0, help_text='Mean wall time per Red decision')),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='games', to='core.experimentrun')),
            ],
            options={
                'ordering': ['run', 'id'],
                'indexes': [models.Index(fields=['blue_agent', 'red_agent'], name='game_agents_idx')],
            },
        ),
    ]
